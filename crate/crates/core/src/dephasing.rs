//! The characteristic function `C_{m,m'}(t)` that rescales each coherence of
//! a mode coupled to the thermal cross-Kerr reservoir, and the time scales
//! derived from it.
//!
//! `C` depends on `m, m'` only through `delta = m − m'`. Magnitudes are
//! accumulated as `ln|C|²` so products over 10⁶ modes never underflow; the
//! phase is accumulated separately.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::output::{fmt_f64, CsvSink};
use crate::reservoir::{coupling_norm, ReservoirParams, SpectralDistribution};

/// `ln|C|²` and `arg C` at one `(delta, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub log_abs_sq: f64,
    pub phase: f64,
}

impl KernelValue {
    pub const ONE: KernelValue = KernelValue {
        log_abs_sq: 0.0,
        phase: 0.0,
    };

    pub fn abs_sq(&self) -> f64 {
        self.log_abs_sq.exp()
    }

    pub fn abs(&self) -> f64 {
        (0.5 * self.log_abs_sq).exp()
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.log_abs_sq == 0.0 && self.phase == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        Complex64::from_polar(self.abs(), self.phase)
    }

    pub fn conj(&self) -> Self {
        Self {
            log_abs_sq: self.log_abs_sq,
            phase: -self.phase,
        }
    }
}

/// Wraps an angle into `(−π, π]`.
pub(crate) fn wrap_phase(phi: f64) -> f64 {
    let r = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Thermal product `Π_k (1 − q)/(1 − q e^{−i ν_k t})`, `q = e^{−x}`, for
/// effective per-mode frequencies `ν_k`.
///
/// Each factor has `|·|² = 1/(1 + sin²(ν t/2)/sinh²(x/2))` and argument
/// `−atan2(q sin(ν t), 1 − q cos(ν t))`.
pub(crate) fn thermal_product<I>(freqs: I, x: f64, t: f64) -> KernelValue
where
    I: IntoIterator<Item = f64>,
{
    let sh = (0.5 * x).sinh();
    let inv_sh2 = 1.0 / (sh * sh);
    let q = (-x).exp();
    let mut log_abs_sq = 0.0;
    let mut phase = 0.0;
    for nu in freqs {
        let theta = nu * t;
        if theta == 0.0 {
            continue;
        }
        let s = (0.5 * theta).sin();
        log_abs_sq -= (s * s * inv_sh2).ln_1p();
        let (sin_t, cos_t) = theta.sin_cos();
        phase = wrap_phase(phase - (q * sin_t).atan2(1.0 - q * cos_t));
    }
    KernelValue { log_abs_sq, phase }
}

/// Reservoir spectrum plus thermal parameters; evaluates `C_{m,m'}(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicKernel {
    spectrum: SpectralDistribution,
    params: ReservoirParams,
}

impl CharacteristicKernel {
    pub fn new(spectrum: SpectralDistribution, params: ReservoirParams) -> Result<Self> {
        if spectrum.n_modes() != params.n_modes {
            return Err(Error::invalid(format!(
                "spectrum has {} modes, params say {}",
                spectrum.n_modes(),
                params.n_modes
            )));
        }
        if !(params.x > 0.0 && params.x.is_finite()) {
            return Err(Error::invalid(format!(
                "thermal state undefined for x = {}",
                params.x
            )));
        }
        Ok(Self { spectrum, params })
    }

    pub fn spectrum(&self) -> &SpectralDistribution {
        &self.spectrum
    }

    pub fn params(&self) -> &ReservoirParams {
        &self.params
    }

    pub fn x(&self) -> f64 {
        self.params.x
    }

    /// Coupling norm `G`.
    pub fn coupling_norm(&self) -> f64 {
        coupling_norm(&self.spectrum)
    }

    pub fn evaluate(&self, delta: i64, t: f64) -> KernelValue {
        if delta == 0 || t == 0.0 {
            return KernelValue::ONE;
        }
        // evaluate at |delta| and conjugate so C(−δ) = conj C(δ) holds bitwise
        let d = delta.unsigned_abs() as f64;
        let v = thermal_product(
            self.spectrum.couplings().iter().map(|g| d * g),
            self.params.x,
            t,
        );
        if delta < 0 {
            v.conj()
        } else {
            v
        }
    }

    /// `C_{m,m'}(t)` with `delta = m − m'`.
    pub fn char_fn(&self, delta: i64, t: f64) -> Complex64 {
        self.evaluate(delta, t).to_complex()
    }

    /// `ln|C|² = −Σ_k ln(1 + sin²(delta g_k t/2)/sinh²(x/2))`, always `<= 0`.
    pub fn log_abs_sq(&self, delta: i64, t: f64) -> f64 {
        self.evaluate(delta, t).log_abs_sq
    }

    pub fn abs_sq(&self, delta: i64, t: f64) -> f64 {
        self.log_abs_sq(delta, t).exp()
    }

    /// `arg C` in `(−π, π]`.
    pub fn phase(&self, delta: i64, t: f64) -> f64 {
        self.evaluate(delta, t).phase
    }

    /// `τ_D = 2 sinh(x/2)/G`.
    pub fn decoherence_time(&self) -> f64 {
        decoherence_time(self.coupling_norm(), self.params.x)
    }

    /// Short-time law `exp(−delta² t²/τ_D²)`.
    pub fn gaussian_approx(&self, delta: i64, t: f64) -> f64 {
        let r = delta as f64 * t / self.decoherence_time();
        (-r * r).exp()
    }

    pub fn lower_bound_abs_sq(&self) -> f64 {
        lower_bound_abs_sq(&self.params)
    }

    /// Evaluates a `(delta, t)` curve in parallel; output order follows `ts`.
    pub fn curve(&self, delta: i64, ts: &[f64]) -> Vec<CurvePoint> {
        ts.par_iter()
            .map(|&t| CurvePoint {
                t,
                delta,
                value: self.evaluate(delta, t),
            })
            .collect()
    }
}

/// `τ_D = 2 sinh(x/2)/G`.
pub fn decoherence_time(g_norm: f64, x: f64) -> f64 {
    2.0 * (0.5 * x).sinh() / g_norm
}

/// `ln |C|²_LB = N ln[sinh²(x/2)/(1 + sinh²(x/2))] = −N ln(1 + 1/sinh²(x/2))`.
pub fn log_lower_bound_abs_sq(p: &ReservoirParams) -> f64 {
    let sh = (0.5 * p.x).sinh();
    -(p.n_modes as f64) * (1.0 / (sh * sh)).ln_1p()
}

/// Long-time floor `[sinh²(x/2)/(1 + sinh²(x/2))]^N`; underflows to 0 for
/// hot or large reservoirs, see [`log_lower_bound_abs_sq`].
pub fn lower_bound_abs_sq(p: &ReservoirParams) -> f64 {
    log_lower_bound_abs_sq(p).exp()
}

/// `x_crit = 2 arcsinh(1/√(2^{1/N} − 1))`, where the floor equals 1/2.
pub fn critical_beta(n_modes: usize) -> Result<f64> {
    if n_modes == 0 {
        return Err(Error::invalid("critical_beta needs N >= 1"));
    }
    let d = (std::f64::consts::LN_2 / n_modes as f64).exp_m1();
    Ok(2.0 * (1.0 / d.sqrt()).asinh())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub delta: i64,
    pub value: KernelValue,
}

/// Writes `t,delta,abs_sq,log_abs_sq,phase`.
pub fn write_curve_csv(path: &Path, points: &[CurvePoint]) -> Result<()> {
    let mut sink = CsvSink::create(path, &["t", "delta", "abs_sq", "log_abs_sq", "phase"])?;
    for p in points {
        sink.row(&curve_fields(p))?;
    }
    sink.finish()
}

pub(crate) fn curve_fields(p: &CurvePoint) -> [String; 5] {
    [
        fmt_f64(p.t),
        p.delta.to_string(),
        fmt_f64(p.value.abs_sq()),
        fmt_f64(p.value.log_abs_sq),
        fmt_f64(p.value.phase),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::{commensurate_spectrum, gaussian_spectrum, resonant_spectrum};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn kernel(s: SpectralDistribution, x: f64) -> CharacteristicKernel {
        let n = s.n_modes();
        CharacteristicKernel::new(s, ReservoirParams::new(n, x).unwrap()).unwrap()
    }

    // Direct complex product, the literal closed form.
    fn direct_product(s: &SpectralDistribution, x: f64, delta: i64, t: f64) -> Complex64 {
        let q = (-x).exp();
        s.couplings()
            .iter()
            .map(|g| {
                let e = Complex64::from_polar(1.0, -(delta as f64) * g * t);
                Complex64::new(1.0 - q, 0.0) / (Complex64::new(1.0, 0.0) - q * e)
            })
            .product()
    }

    #[test]
    fn diagonal_is_exactly_one() {
        let k = kernel(gaussian_spectrum(100, 0.1125, 50).unwrap(), 1.0);
        for t in [0.0, 0.3, 17.0, 1e4] {
            assert_eq!(k.char_fn(0, t), Complex64::new(1.0, 0.0));
            assert_eq!(k.log_abs_sq(0, t), 0.0);
        }
    }

    #[test]
    fn resonant_recurrence() {
        let s = resonant_spectrum(100, 0.1).unwrap();
        let g = s.couplings()[0];
        let k = kernel(s, 1.0);
        for delta in [1, 2, 5, -3] {
            for n in 1..=4 {
                let t = 2.0 * PI * n as f64 / g;
                let c = k.char_fn(delta, t);
                assert!((c - 1.0).norm() < 1e-9, "delta={delta} n={n} c={c}");
                assert!(k.abs_sq(delta, t) > 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn commensurate_recurrence() {
        let g = 0.013;
        let s = commensurate_spectrum(50, g, &[1, 2, 3, 5, 7]).unwrap();
        let k = kernel(s, 0.5);
        for delta in [1, 3] {
            let t = 2.0 * PI / g;
            assert!(k.abs_sq(delta, t) > 1.0 - 1e-9);
            assert!(k.abs_sq(delta, 0.5 * t) < 0.5);
        }
    }

    #[test]
    fn single_mode_half() {
        let x = 2.0 * 1f64.asinh();
        let s = SpectralDistribution::new(vec![1.0], "single").unwrap();
        let k = kernel(s, x);
        assert_abs_diff_eq!(k.abs_sq(1, PI), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(k.char_fn(1, PI).norm_sqr(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn log_form_matches_direct_product() {
        let s = gaussian_spectrum(30, 0.4, 10).unwrap();
        let k = kernel(s.clone(), 0.7);
        for delta in [-4, -1, 1, 2, 7] {
            for t in [0.01, 0.5, 3.0, 40.0, 512.0] {
                let direct = direct_product(&s, 0.7, delta, t);
                let fast = k.char_fn(delta, t);
                assert!((direct - fast).norm() < 1e-12, "{direct} vs {fast}");
                let lc = k.log_abs_sq(delta, t);
                if lc.abs() < 30.0 {
                    assert_relative_eq!(lc.exp(), direct.norm_sqr(), max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn no_underflow_for_large_reservoirs() {
        let s = gaussian_spectrum(1_000_000, 1.0, 50).unwrap();
        let k = kernel(s, 0.01);
        let l = k.log_abs_sq(3, 50.0);
        assert!(l.is_finite() && l < -1e4, "{l}");
    }

    #[test]
    fn decoherence_time_examples() {
        assert_relative_eq!(decoherence_time(0.1, 0.01), 0.1, max_relative = 1e-5);
        let x = 0.8;
        assert_relative_eq!(
            decoherence_time(2.0 * (0.5f64 * x).sinh(), x),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            decoherence_time(1.0, 2.0 * 1f64.asinh()),
            2.0,
            max_relative = 1e-15
        );
        let k = kernel(gaussian_spectrum(100, 0.1125, 50).unwrap(), 0.01);
        assert_relative_eq!(0.1125 * k.decoherence_time(), 1.13e-2, max_relative = 1e-2);
    }

    #[test]
    fn gaussian_approx_examples() {
        let k = kernel(resonant_spectrum(100, 0.1).unwrap(), 1.0);
        assert_eq!(k.gaussian_approx(1, 0.0), 1.0);
        let tau = k.decoherence_time();
        assert_relative_eq!(
            k.gaussian_approx(1, tau),
            (-1.0f64).exp(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            k.gaussian_approx(-2, 0.5 * tau),
            (-1.0f64).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn gaussian_approx_short_time_accuracy() {
        // Holds for sinh(x/2) well above the per-mode phase, i.e. x >= ~0.3 at N = 100.
        for x in [0.5, 1.0, 2.0] {
            let k = kernel(resonant_spectrum(100, 0.1).unwrap(), x);
            let g = k.coupling_norm();
            for i in 0..=200 {
                let t = 0.5 / g * i as f64 / 200.0;
                let exact = k.abs_sq(1, t);
                let rel = (k.gaussian_approx(1, t) - exact).abs() / exact;
                assert!(rel < 0.05, "x={x} t={t} rel={rel}");
            }
        }
    }

    #[test]
    fn lower_bound_examples() {
        let x = 2.0 * 1f64.asinh();
        let p = ReservoirParams::new(100, x).unwrap();
        assert_relative_eq!(
            lower_bound_abs_sq(&p),
            2f64.powi(-100),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            log_lower_bound_abs_sq(&p),
            -100.0 * std::f64::consts::LN_2,
            max_relative = 1e-13
        );
        let cold = ReservoirParams::new(1000, 60.0).unwrap();
        assert!(log_lower_bound_abs_sq(&cold) > -1e-20);
        assert_eq!(
            lower_bound_abs_sq(&ReservoirParams::new(1000, 800.0).unwrap()),
            1.0
        );
        let mut prev = 0.0;
        for n in [10usize, 1_000, 100_000, 10_000_000] {
            let lb = log_lower_bound_abs_sq(&ReservoirParams::new(n, 3.0).unwrap());
            assert!(lb < prev);
            prev = lb;
        }
        assert_eq!(
            lower_bound_abs_sq(&ReservoirParams::new(10_000_000, 3.0).unwrap()),
            0.0
        );
    }

    #[test]
    fn critical_beta_examples() {
        assert_relative_eq!(
            critical_beta(1).unwrap(),
            2.0 * 1f64.asinh(),
            max_relative = 1e-15
        );
        let x100 = critical_beta(100).unwrap();
        assert_abs_diff_eq!(x100, 6.36, epsilon = 0.01);
        for n in [1usize, 10, 100, 1_000, 10_000] {
            let xc = critical_beta(n).unwrap();
            let lb = lower_bound_abs_sq(&ReservoirParams::new(n, xc).unwrap());
            assert_abs_diff_eq!(lb, 0.5, epsilon = 1e-10);
        }
        let xs: Vec<f64> = [100usize, 1_000, 10_000]
            .iter()
            .map(|&n| critical_beta(n).unwrap())
            .collect();
        assert!(xs[0] < xs[1] && xs[1] < xs[2]);
        assert!(critical_beta(0).is_err());
    }

    #[test]
    fn rejects_mismatch_and_zero_temperature_parameter() {
        let s = resonant_spectrum(10, 1.0).unwrap();
        assert!(
            CharacteristicKernel::new(s.clone(), ReservoirParams::new(11, 1.0).unwrap()).is_err()
        );
        assert!(CharacteristicKernel::new(s, ReservoirParams::new(10, 0.0).unwrap()).is_err());
    }

    #[test]
    fn phase_wrapping() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI + 0.1), -PI + 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_phase(0.25), 0.25, epsilon = 0.0);
    }

    #[test]
    fn curve_csv_header() {
        let k = kernel(resonant_spectrum(4, 1.0).unwrap(), 1.0);
        let pts = k.curve(1, &[0.0, 1.0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_curve_csv(&path, &pts).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.starts_with(
            "t,delta,abs_sq,log_abs_sq,phase\n0.0000000000000000e0,1,1.0000000000000000e0,"
        ));
    }
}
