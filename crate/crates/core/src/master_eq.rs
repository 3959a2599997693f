//! Weak-coupling phase-destroying master equation in the interaction
//! picture,
//!
//! ```text
//! dρ/dt = −i[v1 n̂, ρ] − D t [n̂, [n̂, ρ]],
//! ```
//!
//! integrated with fixed-step RK4, together with its closed-form solution
//! and the generic energy-basis phase-destroying solution
//! `ρ_{nn'} e^{−i(E_n−E_n')t} e^{−γ(t)(E_n−E_n')²}` (natural units, ħ = 1).

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::output::{fmt_f64, CsvSink};
use crate::reservoir::{vr_moment1, vr_moment2, ReservoirParams, SpectralDistribution};

/// Which reservoir quantity multiplies the double commutator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionVariant {
    /// `⟨V_R²⟩`, the literal `ξ⟨V_R⟩²` coefficient.
    SecondMoment,
    /// `⟨V_R²⟩ − ⟨V_R⟩²`; reproduces the exact `t²` decay `1/τ_D²`.
    #[default]
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterEqParams {
    /// `⟨V_R⟩`
    pub v1: f64,
    /// `⟨V_R²⟩`
    pub v2: f64,
    pub variant: DiffusionVariant,
}

impl MasterEqParams {
    pub fn new(v1: f64, v2: f64, variant: DiffusionVariant) -> Result<Self> {
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::invalid("master-equation moments must be finite"));
        }
        if v2 < v1 * v1 - 1e-12 {
            return Err(Error::invalid(format!(
                "second moment {v2} below squared first moment {}",
                v1 * v1
            )));
        }
        Ok(Self { v1, v2, variant })
    }

    /// Moments of the thermal reservoir; fails at `x = 0` where they diverge.
    pub fn from_reservoir(
        s: &SpectralDistribution,
        p: &ReservoirParams,
        variant: DiffusionVariant,
    ) -> Result<Self> {
        Self::new(vr_moment1(s, p)?, vr_moment2(s, p)?, variant)
    }

    /// Coefficient `D` of `t [n̂, [n̂, ρ]]`.
    pub fn diffusion(&self) -> f64 {
        match self.variant {
            DiffusionVariant::SecondMoment => self.v2,
            DiffusionVariant::Variance => self.v2 - self.v1 * self.v1,
        }
    }

    /// Rate of `−ln|ρ_{m,m'}|²` per `(m−m')² t²`.
    pub fn gaussian_decay_coefficient(&self) -> f64 {
        self.diffusion()
    }

    fn rate(&self, delta: f64, t: f64) -> Complex64 {
        Complex64::new(-self.diffusion() * t * delta * delta, -self.v1 * delta)
    }
}

/// Entrywise right-hand side `[−i v1 δ − D t δ²] ρ_{m,m'}`, `δ = m − m'`.
pub fn eid_rhs(rho: &DensityMatrix, p: &MasterEqParams, t: f64) -> Result<DMatrix<Complex64>> {
    if !rho.is_single_mode() {
        return Err(Error::invalid(
            "master equation expects a single-mode state",
        ));
    }
    Ok(rhs_matrix(rho.entries(), p, t))
}

fn rhs_matrix(m: &DMatrix<Complex64>, p: &MasterEqParams, t: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        if i == j {
            Complex64::new(0.0, 0.0)
        } else {
            p.rate(i as f64 - j as f64, t) * m[(i, j)]
        }
    })
}

/// Fixed-step RK4 from `t0` to `t1`. The step count is `ceil((t1−t0)/dt)`
/// with the step shortened uniformly to land exactly on `t1`.
pub fn eid_step_range(
    rho: &DensityMatrix,
    p: &MasterEqParams,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if !rho.is_single_mode() {
        return Err(Error::invalid(
            "master equation expects a single-mode state",
        ));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!(
            "dt must be finite and > 0, got {dt}"
        )));
    }
    if !(t0 >= 0.0 && t1 >= t0 && t1.is_finite()) {
        return Err(Error::invalid(format!(
            "bad integration interval [{t0}, {t1}]"
        )));
    }
    let span = t1 - t0;
    let steps = (span / dt).ceil() as usize;
    let mut y = rho.entries().clone();
    if steps > 0 {
        let h = span / steps as f64;
        for i in 0..steps {
            let t = t0 + i as f64 * h;
            y = rk4_step(&y, p, t, h);
        }
    }
    DensityMatrix::new_unchecked(rho.dims().to_vec(), y)
}

/// Integrates from `t = 0` to `t_end`.
pub fn eid_integrate(
    rho0: &DensityMatrix,
    p: &MasterEqParams,
    t_end: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    eid_step_range(rho0, p, 0.0, t_end, dt)
}

fn rk4_step(y: &DMatrix<Complex64>, p: &MasterEqParams, t: f64, h: f64) -> DMatrix<Complex64> {
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let k1 = rhs_matrix(y, p, t);
    let k2 = rhs_matrix(&(y + &k1 * half), p, t + 0.5 * h);
    let k3 = rhs_matrix(&(y + &k2 * half), p, t + 0.5 * h);
    let k4 = rhs_matrix(&(y + &k3 * full), p, t + h);
    let two = Complex64::new(2.0, 0.0);
    y + (k1 + k2 * two + k3 * two + k4) * Complex64::new(h / 6.0, 0.0)
}

/// `ρ_{m,m'}(t) = ρ_{m,m'}(0) exp[−i v1 δ t − D δ² t²/2]`.
pub fn eid_analytic(rho0: &DensityMatrix, p: &MasterEqParams, t: f64) -> Result<DensityMatrix> {
    if !rho0.is_single_mode() {
        return Err(Error::invalid(
            "master equation expects a single-mode state",
        ));
    }
    let n = rho0.dim();
    let d = p.diffusion();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return rho0.get(i, j);
        }
        let delta = i as f64 - j as f64;
        let f = Complex64::new(-0.5 * d * delta * delta * t * t, -p.v1 * delta * t).exp();
        rho0.get(i, j) * f
    });
    DensityMatrix::new_unchecked(vec![n], entries)
}

/// Accumulated coefficient `γ(t)` with `dγ/dt = τ(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSchedule {
    /// Constant `τ`: `γ = τ t`.
    Constant { tau: f64 },
    /// `τ(t) = rate · t`: `γ = rate t²/2`.
    Linear { rate: f64 },
}

impl GammaSchedule {
    pub fn gamma(&self, t: f64) -> f64 {
        match *self {
            GammaSchedule::Constant { tau } => tau * t,
            GammaSchedule::Linear { rate } => 0.5 * rate * t * t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SidParams {
    pub energies: Vec<f64>,
    pub gamma: GammaSchedule,
}

impl SidParams {
    pub fn new(energies: Vec<f64>, gamma: GammaSchedule) -> Result<Self> {
        let rate_ok = match gamma {
            GammaSchedule::Constant { tau } => tau >= 0.0 && tau.is_finite(),
            GammaSchedule::Linear { rate } => rate >= 0.0 && rate.is_finite(),
        };
        if !rate_ok {
            return Err(Error::invalid("γ(t) must start at 0 and be nondecreasing"));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("energies must be finite"));
        }
        Ok(Self { energies, gamma })
    }

    fn check_covers(&self, rho: &DensityMatrix) -> Result<()> {
        if self.energies.len() < rho.dim() {
            return Err(Error::invalid(format!(
                "{} energies for a {}-dimensional state",
                self.energies.len(),
                rho.dim()
            )));
        }
        Ok(())
    }
}

/// `ρ(t)_{nn'} = ρ_{nn'} e^{−i(E_n−E_n')t} exp[−γ(t)(E_n−E_n')²]`.
pub fn sid_solution(rho0: &DensityMatrix, p: &SidParams, t: f64) -> Result<DensityMatrix> {
    p.check_covers(rho0)?;
    let g = p.gamma.gamma(t);
    let n = rho0.dim();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return rho0.get(i, j);
        }
        let de = p.energies[i] - p.energies[j];
        rho0.get(i, j) * Complex64::new(-g * de * de, -de * t).exp()
    });
    DensityMatrix::new_unchecked(rho0.dims().to_vec(), entries)
}

/// `P(t) = Σ |ρ_{nn'}|² exp[−2γ(t)(E_n−E_n')²]`.
pub fn sid_purity(rho0: &DensityMatrix, p: &SidParams, t: f64) -> Result<f64> {
    p.check_covers(rho0)?;
    let g = p.gamma.gamma(t);
    let n = rho0.dim();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let de = p.energies[i] - p.energies[j];
            let w = rho0.get(i, j).norm_sqr();
            if w != 0.0 {
                total += w * (-2.0 * g * de * de).exp();
            }
        }
    }
    Ok(total)
}

/// Writes `t,m,m_prime,abs` for every upper-triangle coherence.
pub fn write_coherence_csv(path: &Path, series: &[(f64, DensityMatrix)]) -> Result<()> {
    let mut sink = CsvSink::create(path, &["t", "m", "m_prime", "abs"])?;
    for (t, rho) in series {
        for m in 0..rho.dim() {
            for mp in m + 1..rho.dim() {
                sink.row(&[
                    fmt_f64(*t),
                    m.to_string(),
                    mp.to_string(),
                    fmt_f64(rho.get(m, mp).norm()),
                ])?;
            }
        }
    }
    sink.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dephasing::CharacteristicKernel;
    use crate::fock::{cat_state, density_from_pure, fock_superposition, purity, DEFAULT_TAIL_TOL};
    use crate::reservoir::{resonant_spectrum, vr_variance};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn max_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
        (a.entries() - b.entries())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn superposition() -> DensityMatrix {
        density_from_pure(&fock_superposition(1, 2).unwrap())
    }

    #[test]
    fn diagonal_states_are_fixed_points() {
        let rho = crate::evolution::equilibrium_state(&superposition());
        let p = MasterEqParams::new(0.3, 2.0, DiffusionVariant::SecondMoment).unwrap();
        let d = eid_rhs(&rho, &p, 1.7).unwrap();
        assert!(d.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn unitary_at_time_zero() {
        let rho = superposition();
        let p = MasterEqParams::new(0.4, 5.0, DiffusionVariant::SecondMoment).unwrap();
        let d = eid_rhs(&rho, &p, 0.0).unwrap();
        // ρ̇₂₁ = −i v1 ρ₂₁
        assert_abs_diff_eq!(
            (d[(2, 1)] - Complex64::new(0.0, -0.4) * rho.get(2, 1)).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn scalar_gaussian_solution() {
        let rho0 = superposition();
        let p = MasterEqParams::new(0.0, 1.0, DiffusionVariant::SecondMoment).unwrap();
        let d = eid_rhs(&rho0, &p, 0.8).unwrap();
        assert_abs_diff_eq!(
            (d[(1, 2)] + rho0.get(1, 2) * 0.8).norm(),
            0.0,
            epsilon = 1e-15
        );
        let rho = eid_integrate(&rho0, &p, 1.0, 1e-3).unwrap();
        assert_abs_diff_eq!(rho.get(1, 2).norm() / 0.5, (-0.5f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn integration_matches_analytic() {
        let rho0 =
            density_from_pure(&cat_state(Complex64::new(1.1, 0.4), DEFAULT_TAIL_TOL).unwrap());
        let p = MasterEqParams::new(0.6, 0.9, DiffusionVariant::Variance).unwrap();
        for t_end in [0.0, 0.3, 1.0, 2.5] {
            let num = eid_integrate(&rho0, &p, t_end, 1e-3).unwrap();
            let exact = eid_analytic(&rho0, &p, t_end).unwrap();
            assert!(max_diff(&num, &exact) < 1e-8);
            assert_abs_diff_eq!(num.trace(), 1.0, epsilon = 1e-10);
            assert!(num.hermiticity_violation().unwrap() < 1e-10);
        }
        assert_eq!(eid_integrate(&rho0, &p, 0.0, 0.1).unwrap(), rho0);
    }

    #[test]
    fn fourth_order_convergence() {
        let rho0 = superposition();
        let p = MasterEqParams::new(1.0, 2.0, DiffusionVariant::SecondMoment).unwrap();
        let exact = eid_analytic(&rho0, &p, 1.0).unwrap();
        let err = |dt| max_diff(&eid_integrate(&rho0, &p, 1.0, dt).unwrap(), &exact);
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_step() {
        let rho0 = superposition();
        let p = MasterEqParams::new(0.0, 1.0, DiffusionVariant::Variance).unwrap();
        assert!(eid_integrate(&rho0, &p, 1.0, 0.0).is_err());
        assert!(eid_integrate(&rho0, &p, 1.0, -1e-3).is_err());
        assert!(eid_integrate(&rho0, &p, 1.0, f64::NAN).is_err());
        assert!(MasterEqParams::new(2.0, 1.0, DiffusionVariant::Variance).is_err());
    }

    #[test]
    fn rejects_infinite_temperature() {
        let s = resonant_spectrum(10, 0.1).unwrap();
        let p = ReservoirParams::new(10, 0.0).unwrap();
        assert!(matches!(
            MasterEqParams::from_reservoir(&s, &p, DiffusionVariant::Variance),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn variance_coefficient_is_inverse_tau_d_squared() {
        let s = resonant_spectrum(100, 0.1).unwrap();
        let rp = ReservoirParams::new(100, 1.0).unwrap();
        let p = MasterEqParams::from_reservoir(&s, &rp, DiffusionVariant::Variance).unwrap();
        let k = CharacteristicKernel::new(s.clone(), rp).unwrap();
        let tau = k.decoherence_time();
        assert_relative_eq!(
            p.gaussian_decay_coefficient(),
            1.0 / (tau * tau),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            p.diffusion(),
            vr_variance(&s, &rp).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn short_time_decay_matches_exact_dynamics() {
        let s = resonant_spectrum(100, 0.1).unwrap();
        let rp = ReservoirParams::new(100, 1.0).unwrap();
        let k = CharacteristicKernel::new(s.clone(), rp).unwrap();
        let tau = k.decoherence_time();
        let rho0 = superposition();
        let variance = MasterEqParams::from_reservoir(&s, &rp, DiffusionVariant::Variance).unwrap();
        let second =
            MasterEqParams::from_reservoir(&s, &rp, DiffusionVariant::SecondMoment).unwrap();
        let mut second_worst: f64 = 0.0;
        for i in 1..=10 {
            let t = 0.03 * tau * i as f64;
            let exact = k.abs_sq(1, t).sqrt();
            let me = eid_integrate(&rho0, &variance, t, 1e-2)
                .unwrap()
                .get(2, 1)
                .norm()
                / 0.5;
            assert!((me - exact).abs() / exact < 0.02, "t={t}: {me} vs {exact}");
            let me2 = eid_analytic(&rho0, &second, t).unwrap().get(2, 1).norm() / 0.5;
            second_worst = second_worst.max((me2 - exact).abs() / exact);
        }
        // the literal second-moment coefficient decays far too fast
        assert!(second_worst > 0.5);
    }

    #[test]
    fn sid_unitary_when_gamma_zero() {
        let rho0 = superposition();
        let p = SidParams::new(vec![0.0, 1.0, 2.0], GammaSchedule::Constant { tau: 0.0 }).unwrap();
        let rho = sid_solution(&rho0, &p, 2.0).unwrap();
        assert_abs_diff_eq!(purity(&rho), 1.0, epsilon = 1e-14);
        assert!((rho.get(2, 1) - rho0.get(2, 1) * Complex64::from_polar(1.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn sid_purity_closed_form_matches_state() {
        let rho0 =
            density_from_pure(&cat_state(Complex64::new(1.5, 0.0), DEFAULT_TAIL_TOL).unwrap());
        let energies: Vec<f64> = (0..rho0.dim()).map(|n| n as f64).collect();
        let p = SidParams::new(energies, GammaSchedule::Constant { tau: 0.05 }).unwrap();
        for t in [0.0, 0.1, 1.0, 5.0] {
            let direct = purity(&sid_solution(&rho0, &p, t).unwrap());
            assert_abs_diff_eq!(sid_purity(&rho0, &p, t).unwrap(), direct, epsilon = 1e-12);
        }
        let all: f64 = rho0.entries().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(sid_purity(&rho0, &p, 0.0).unwrap(), all, epsilon = 1e-15);
        let diag: f64 = rho0.populations().iter().map(|r| r * r).sum();
        assert_abs_diff_eq!(sid_purity(&rho0, &p, 1e6).unwrap(), diag, epsilon = 1e-15);
    }

    #[test]
    fn sid_two_level_purity() {
        let rho0 = density_from_pure(&fock_superposition(0, 1).unwrap());
        let p = SidParams::new(vec![0.0, 1.0], GammaSchedule::Constant { tau: 1.0 }).unwrap();
        let expected = 0.5 * (1.0 + (-2.0f64).exp());
        assert_abs_diff_eq!(
            sid_purity(&rho0, &p, 1.0).unwrap(),
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn sid_identifies_with_master_equation() {
        // H ↔ v1 n̂ and τ(t) ↔ ξ t, so E_n = v1 n and γ = (v2/v1²) t²/2.
        let rho0 =
            density_from_pure(&cat_state(Complex64::new(1.2, 0.0), DEFAULT_TAIL_TOL).unwrap());
        let me = MasterEqParams::new(0.8, 1.5, DiffusionVariant::SecondMoment).unwrap();
        let energies: Vec<f64> = (0..rho0.dim()).map(|n| me.v1 * n as f64).collect();
        let xi = me.v2 / (me.v1 * me.v1);
        let sid = SidParams::new(energies, GammaSchedule::Linear { rate: xi }).unwrap();
        for t in [0.2, 0.9, 2.0] {
            let a = eid_analytic(&rho0, &me, t).unwrap();
            let b = sid_solution(&rho0, &sid, t).unwrap();
            assert!(max_diff(&a, &b) < 1e-14);
        }
        // E_n = n with γ = v2 t²/2 reproduces the v1 = 1 equation
        let me1 = MasterEqParams::new(1.0, 1.5, DiffusionVariant::SecondMoment).unwrap();
        let unit = SidParams::new(
            (0..rho0.dim()).map(|n| n as f64).collect(),
            GammaSchedule::Linear { rate: 1.5 },
        )
        .unwrap();
        let a = eid_analytic(&rho0, &me1, 1.3).unwrap();
        let b = sid_solution(&rho0, &unit, 1.3).unwrap();
        assert!(max_diff(&a, &b) < 1e-14);
    }

    #[test]
    fn sid_needs_enough_energies() {
        let p = SidParams::new(vec![0.0, 1.0], GammaSchedule::Constant { tau: 1.0 }).unwrap();
        assert!(sid_solution(&superposition(), &p, 1.0).is_err());
        assert!(SidParams::new(vec![0.0], GammaSchedule::Constant { tau: -1.0 }).is_err());
    }
}
