//! Exact reduced dynamics of a single mode: every coherence `ρ_{m,m'}` is
//! multiplied by `C_{m−m'}(t)` and the free phase `e^{−i(m−m')ω₀t}`;
//! populations never change.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dephasing::CharacteristicKernel;
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, PhotonDistribution};
use crate::output::{fmt_f64, CsvSink};

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub omega0: f64,
    pub kernel: CharacteristicKernel,
    pub include_free_phase: bool,
}

impl EvolutionConfig {
    pub fn new(omega0: f64, kernel: CharacteristicKernel) -> Result<Self> {
        if !(omega0 >= 0.0 && omega0.is_finite()) {
            return Err(Error::invalid(format!(
                "omega0 must be finite and >= 0, got {omega0}"
            )));
        }
        Ok(Self {
            omega0,
            kernel,
            include_free_phase: true,
        })
    }

    /// Purity-only configuration: free phase off.
    pub fn for_purity(kernel: CharacteristicKernel) -> Self {
        Self {
            omega0: 0.0,
            kernel,
            include_free_phase: false,
        }
    }
}

/// `ρ(t)_{m,m'} = ρ_{m,m'}(0) C_{m−m'}(t) e^{−i(m−m')ω₀t}`.
pub fn evolve(rho0: &DensityMatrix, cfg: &EvolutionConfig, t: f64) -> Result<DensityMatrix> {
    if !rho0.is_single_mode() {
        return Err(Error::invalid(
            "evolve expects a single-mode density matrix",
        ));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let n = rho0.dim();
    // factors[d] for d = m − m' >= 0; negative offsets use the conjugate
    let factors: Vec<Complex64> = (0..n as i64)
        .map(|d| {
            let mut f = cfg.kernel.char_fn(d, t);
            if cfg.include_free_phase && d != 0 {
                f *= Complex64::from_polar(1.0, -(d as f64) * cfg.omega0 * t);
            }
            f
        })
        .collect();
    let entries = DMatrix::from_fn(n, n, |m, mp| {
        let r = rho0.get(m, mp);
        if m >= mp {
            r * factors[m - mp]
        } else {
            r * factors[mp - m].conj()
        }
    });
    DensityMatrix::new_unchecked(vec![n], entries)
}

/// Purity `Σ_{m,m'} |p(m)|²|p(m')|²|C_{m−m'}(t)|²` on a time grid, grouped
/// by offset: `P = S(0) + 2 Σ_{d>0} S(d) |C_d|²` with
/// `S(d) = Σ_m |p(m)|²|p(m+d)|²`.
pub fn purity_curve(
    dist: &PhotonDistribution,
    cfg: &EvolutionConfig,
    ts: &[f64],
) -> Vec<(f64, f64)> {
    let w = dist.probabilities();
    let n = w.len();
    let overlaps: Vec<(i64, f64)> = (0..n)
        .map(|d| (d as i64, (0..n - d).map(|m| w[m] * w[m + d]).sum::<f64>()))
        .collect();
    ts.par_iter()
        .map(|&t| {
            let coherent: f64 = overlaps[1..]
                .iter()
                .filter(|(_, s)| *s != 0.0)
                .map(|&(d, s)| s * cfg.kernel.abs_sq(d, t))
                .sum();
            (t, overlaps[0].1 + 2.0 * coherent)
        })
        .collect()
}

/// Fully dephased state: off-diagonal entries zeroed.
pub fn equilibrium_state(rho0: &DensityMatrix) -> DensityMatrix {
    let n = rho0.dim();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            rho0.get(i, i)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    DensityMatrix::new_unchecked(rho0.dims().to_vec(), entries)
        .expect("same shape as a valid matrix")
}

/// Writes `t,purity`.
pub fn write_purity_csv(path: &Path, curve: &[(f64, f64)]) -> Result<()> {
    let mut sink = CsvSink::create(path, &["t", "purity"])?;
    for &(t, p) in curve {
        sink.row(&[fmt_f64(t), fmt_f64(p)])?;
    }
    sink.finish()
}

/// Writes the state as `m,m_prime,re,im` triplets.
pub fn write_state_csv(path: &Path, rho: &DensityMatrix) -> Result<()> {
    let mut sink = CsvSink::create(path, &["m", "m_prime", "re", "im"])?;
    for m in 0..rho.dim() {
        for mp in 0..rho.dim() {
            let z = rho.get(m, mp);
            sink.row(&[m.to_string(), mp.to_string(), fmt_f64(z.re), fmt_f64(z.im)])?;
        }
    }
    sink.finish()
}
