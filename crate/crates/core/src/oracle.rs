//! Brute-force validators built directly on the truncated thermal
//! distribution `p(n) = (1 − e^{−x}) e^{−xn}`, with no closed forms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::reservoir::SpectralDistribution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    pub n_max_per_mode: usize,
    /// Discarded per-mode probability mass `e^{−x(n_max+1)}`.
    pub tail_bound: f64,
}

impl TruncationSpec {
    pub fn new(x: f64, n_max_per_mode: usize) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid(format!("oracle needs x > 0, got {x}")));
        }
        Ok(Self {
            n_max_per_mode,
            tail_bound: (-x * (n_max_per_mode as f64 + 1.0)).exp(),
        })
    }

    /// Smallest `n_max` whose tail mass is at most `tol`.
    pub fn for_tolerance(x: f64, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::invalid(format!(
                "tolerance must lie in (0, 1), got {tol}"
            )));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid(format!("oracle needs x > 0, got {x}")));
        }
        let n = ((-tol.ln()) / x - 1.0).ceil().max(0.0) as usize;
        Self::new(x, n)
    }

    /// Truncation for moment sums: the `n²`-weighted tail
    /// `Σ_{n>n_max} n² p(n)` is pushed below `tol` as well.
    pub fn for_moments(x: f64, tol: f64) -> Result<Self> {
        let mut spec = Self::for_tolerance(x, tol)?;
        loop {
            let n1 = spec.n_max_per_mode as f64 + 1.0;
            // Σ_{n≥n1} n² q^n ≤ q^{n1} (n1² + …)/(1−q)³ bound
            let q = (-x).exp();
            let weighted = spec.tail_bound * (n1 * n1 + 2.0 * n1 + 2.0) / (1.0 - q).powi(3);
            if weighted <= tol {
                return Ok(spec);
            }
            spec = Self::new(x, spec.n_max_per_mode + spec.n_max_per_mode / 4 + 8)?;
        }
    }
}

fn thermal_weights(x: f64, n_max: usize) -> Vec<f64> {
    let z = -(-x).exp_m1();
    (0..=n_max).map(|n| z * (-x * n as f64).exp()).collect()
}

/// `Π_k Σ_{n=0}^{n_max} (1−e^{−x}) e^{−xn} e^{−i δ g_k n t}` by direct summation.
pub fn oracle_char_fn(
    s: &SpectralDistribution,
    x: f64,
    delta: i64,
    t: f64,
    spec: &TruncationSpec,
) -> Result<Complex64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::invalid(format!("oracle needs x > 0, got {x}")));
    }
    let w = thermal_weights(x, spec.n_max_per_mode);
    let mut total = Complex64::new(1.0, 0.0);
    for &g in s.couplings() {
        let theta = delta as f64 * g * t;
        let mode: Complex64 = w
            .iter()
            .enumerate()
            .map(|(n, &p)| p * Complex64::from_polar(1.0, -theta * n as f64))
            .sum();
        total *= mode;
    }
    Ok(total)
}

/// `(⟨V_R⟩, ⟨V_R²⟩)` for `V_R = Σ g_k n̂_k` over the truncated product
/// distribution, from numerically summed per-mode `⟨n⟩` and `⟨n²⟩`.
pub fn oracle_moments(
    s: &SpectralDistribution,
    x: f64,
    spec: &TruncationSpec,
) -> Result<(f64, f64)> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::invalid(format!("oracle needs x > 0, got {x}")));
    }
    let w = thermal_weights(x, spec.n_max_per_mode);
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    for (n, p) in w.iter().enumerate() {
        let nf = n as f64;
        n1 += nf * p;
        n2 += nf * nf * p;
    }
    // ⟨(Σ g_k n_k)²⟩ = Σ_k g_k² ⟨n²⟩ + Σ_{k≠l} g_k g_l ⟨n⟩²
    let sum_g: f64 = s.couplings().iter().sum();
    let sum_g2: f64 = s.couplings().iter().map(|g| g * g).sum();
    let m1 = sum_g * n1;
    let m2 = sum_g2 * n2 + (sum_g * sum_g - sum_g2) * n1 * n1;
    Ok((m1, m2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dephasing::CharacteristicKernel;
    use crate::reservoir::{
        gaussian_spectrum, resonant_spectrum, vr_moment1, vr_moment2, vr_moment2_raw_coefficient,
        ReservoirParams,
    };
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::{LN_2, PI};

    fn single() -> SpectralDistribution {
        SpectralDistribution::new(vec![1.0], "single").unwrap()
    }

    #[test]
    fn tail_bound_definition() {
        let s = TruncationSpec::new(0.5, 60).unwrap();
        assert_relative_eq!(s.tail_bound, (-30.5f64).exp(), max_relative = 1e-15);
        let t = TruncationSpec::for_tolerance(0.5, 1e-14).unwrap();
        assert!(t.tail_bound <= 1e-14);
        assert!(
            TruncationSpec::new(0.5, t.n_max_per_mode - 1)
                .unwrap()
                .tail_bound
                > 1e-14
        );
        assert!(TruncationSpec::new(0.0, 5).is_err());
    }

    #[test]
    fn zero_offset_is_one() {
        let spec = TruncationSpec::new(0.5, 60).unwrap();
        let c = oracle_char_fn(&single(), 0.5, 0, 3.0, &spec).unwrap();
        assert_abs_diff_eq!((c - 1.0).norm(), 0.0, epsilon = spec.tail_bound + 1e-15);
    }

    #[test]
    fn single_mode_half() {
        let x = 2.0 * 1f64.asinh();
        let spec = TruncationSpec::for_tolerance(x, 1e-14).unwrap();
        let c = oracle_char_fn(&single(), x, 1, PI, &spec).unwrap();
        assert_abs_diff_eq!(c.norm_sqr(), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn matches_closed_form() {
        let s = gaussian_spectrum(50, 0.2, 20).unwrap();
        for x in [0.5, 1.0, 3.0] {
            let spec = TruncationSpec::new(x, 60).unwrap();
            let k =
                CharacteristicKernel::new(s.clone(), ReservoirParams::new(50, x).unwrap()).unwrap();
            let bound = 50.0 * spec.tail_bound + 1e-12;
            for delta in [-2, 1, 3] {
                for t in [0.05, 1.0, 12.0, 300.0] {
                    let o = oracle_char_fn(&s, x, delta, t, &spec).unwrap();
                    let c = k.char_fn(delta, t);
                    assert!((o - c).norm() < bound.max(1e-10), "x={x} d={delta} t={t}");
                }
            }
        }
    }

    #[test]
    fn doubling_truncation_within_tail() {
        let s = resonant_spectrum(20, 0.3).unwrap();
        let x = 0.8;
        let a = TruncationSpec::new(x, 30).unwrap();
        let b = TruncationSpec::new(x, 60).unwrap();
        for t in [0.3, 2.0, 9.0] {
            let va = oracle_char_fn(&s, x, 1, t, &a).unwrap();
            let vb = oracle_char_fn(&s, x, 1, t, &b).unwrap();
            assert!((va - vb).norm() < 20.0 * a.tail_bound * 2.0);
        }
    }

    #[test]
    fn moments_single_mode() {
        let spec = TruncationSpec::for_moments(LN_2, 1e-14).unwrap();
        let (m1, m2) = oracle_moments(&single(), LN_2, &spec).unwrap();
        assert_abs_diff_eq!(m1, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m2, 3.0, epsilon = 1e-10);
    }

    #[test]
    fn moments_vacuum() {
        let spec = TruncationSpec::new(50.0, 10).unwrap();
        let (m1, m2) = oracle_moments(&resonant_spectrum(10, 1.0).unwrap(), 50.0, &spec).unwrap();
        assert!(m1 < 1e-20 && m2 < 1e-20);
    }

    #[test]
    fn moments_decide_second_moment_form() {
        let s = gaussian_spectrum(100, 0.1125, 50).unwrap();
        for x in [0.01, 0.1, 1.0, 5.0] {
            let p = ReservoirParams::new(100, x).unwrap();
            let spec = TruncationSpec::for_moments(x, 1e-16).unwrap();
            let (m1, m2) = oracle_moments(&s, x, &spec).unwrap();
            assert_relative_eq!(m1, vr_moment1(&s, &p).unwrap(), max_relative = 1e-10);
            assert_relative_eq!(m2, vr_moment2(&s, &p).unwrap(), max_relative = 1e-10);
            let raw = vr_moment2_raw_coefficient(&s, &p).unwrap();
            assert!((raw - m2).abs() / m2 > 1e-6);
        }
    }
}
