//! Two modes coupled to the same reservoir,
//! `H_S = ω_a n̂_a + ω_b n̂_b + g_ab n̂_a n̂_b`: joint characteristic
//! function, exact evolution, `τ_ab` and negativity.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dephasing::{thermal_product, KernelValue};
use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::output::{fmt_f64, CsvSink};
use crate::reservoir::{ReservoirParams, SpectralDistribution};

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteKernel {
    spectrum_a: SpectralDistribution,
    spectrum_b: SpectralDistribution,
    params: ReservoirParams,
    pub omega_a: f64,
    pub omega_b: f64,
    pub g_ab: f64,
}

impl BipartiteKernel {
    pub fn new(
        spectrum_a: SpectralDistribution,
        spectrum_b: SpectralDistribution,
        params: ReservoirParams,
    ) -> Result<Self> {
        if spectrum_a.n_modes() != spectrum_b.n_modes() || spectrum_a.n_modes() != params.n_modes {
            return Err(Error::invalid(format!(
                "mode counts differ: a = {}, b = {}, params = {}",
                spectrum_a.n_modes(),
                spectrum_b.n_modes(),
                params.n_modes
            )));
        }
        if !(params.x > 0.0 && params.x.is_finite()) {
            return Err(Error::invalid(format!(
                "thermal state undefined for x = {}",
                params.x
            )));
        }
        Ok(Self {
            spectrum_a,
            spectrum_b,
            params,
            omega_a: 0.0,
            omega_b: 0.0,
            g_ab: 0.0,
        })
    }

    /// Both modes see the same couplings.
    pub fn symmetric(spectrum: SpectralDistribution, params: ReservoirParams) -> Result<Self> {
        Self::new(spectrum.clone(), spectrum, params)
    }

    pub fn with_system(mut self, omega_a: f64, omega_b: f64, g_ab: f64) -> Result<Self> {
        if ![omega_a, omega_b, g_ab].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("system frequencies must be finite"));
        }
        self.omega_a = omega_a;
        self.omega_b = omega_b;
        self.g_ab = g_ab;
        Ok(self)
    }

    pub fn params(&self) -> &ReservoirParams {
        &self.params
    }

    pub fn spectrum_a(&self) -> &SpectralDistribution {
        &self.spectrum_a
    }

    pub fn spectrum_b(&self) -> &SpectralDistribution {
        &self.spectrum_b
    }

    fn combined(&self, da: i64, db: i64) -> impl Iterator<Item = f64> + '_ {
        let (fa, fb) = (da as f64, db as f64);
        self.spectrum_a
            .couplings()
            .iter()
            .zip(self.spectrum_b.couplings())
            .map(move |(ga, gb)| fa * ga + fb * gb)
    }

    pub fn evaluate(&self, da: i64, db: i64, t: f64) -> KernelValue {
        if (da == 0 && db == 0) || t == 0.0 {
            return KernelValue::ONE;
        }
        thermal_product(self.combined(da, db), self.params.x, t)
    }

    /// `Π_k (1−q)/(1 − q e^{−i(da g_ak + db g_bk)t})`.
    pub fn char_fn2(&self, da: i64, db: i64, t: f64) -> Complex64 {
        self.evaluate(da, db, t).to_complex()
    }

    /// `[Σ_k ((g_ak da + g_bk db)/(2 sinh(x/2)))²]^{−1/2}`.
    pub fn tau_ab(&self, da: i64, db: i64) -> DecoherenceTime {
        let s2: f64 = self.combined(da, db).map(|v| v * v).sum();
        if s2 == 0.0 {
            return DecoherenceTime::Infinite;
        }
        DecoherenceTime::Finite(2.0 * (0.5 * self.params.x).sinh() / s2.sqrt())
    }

    /// Entanglement time scale `2 sinh(x/2)/G_ab` with
    /// `G_ab² = Σ_k (g_ak + g_bk)²/2`.
    pub fn disentanglement_time(&self) -> DecoherenceTime {
        let s2: f64 = self.combined(1, 1).map(|v| 0.5 * v * v).sum();
        if s2 == 0.0 {
            return DecoherenceTime::Infinite;
        }
        DecoherenceTime::Finite(2.0 * (0.5 * self.params.x).sinh() / s2.sqrt())
    }
}

/// A decoherence time that may be infinite for a decoherence-free combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecoherenceTime {
    Finite(f64),
    Infinite,
}

impl DecoherenceTime {
    pub fn finite(self) -> Option<f64> {
        match self {
            DecoherenceTime::Finite(t) => Some(t),
            DecoherenceTime::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// Exact two-mode evolution: each entry is multiplied by the joint
/// characteristic function, the free phases and the `g_ab` phase.
pub fn evolve2(rho0: &DensityMatrix, k: &BipartiteKernel, t: f64) -> Result<DensityMatrix> {
    if !rho0.is_two_mode() {
        return Err(Error::invalid("evolve2 expects a two-mode density matrix"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let (na, nb) = (rho0.dims()[0] as i64, rho0.dims()[1] as i64);
    // cache by offsets (da, db), da in [0, na), db in (−nb, nb)
    let width = (2 * nb - 1) as usize;
    let cache: Vec<Complex64> = (0..na)
        .flat_map(|da| (-(nb - 1)..nb).map(move |db| (da, db)))
        .map(|(da, db)| k.char_fn2(da, db, t))
        .collect();
    let factor = |da: i64, db: i64| -> Complex64 {
        if da >= 0 {
            cache[da as usize * width + (db + nb - 1) as usize]
        } else {
            cache[(-da) as usize * width + (-db + nb - 1) as usize].conj()
        }
    };
    let n = rho0.dim();
    let entries = DMatrix::from_fn(n, n, |i, j| {
        let r = rho0.get(i, j);
        if i == j || r == Complex64::new(0.0, 0.0) {
            return r;
        }
        let (a, b) = rho0.levels(i);
        let (ap, bp) = rho0.levels(j);
        let (da, db) = (a as i64 - ap as i64, b as i64 - bp as i64);
        let unitary = da as f64 * k.omega_a
            + db as f64 * k.omega_b
            + (a as f64 * b as f64 - ap as f64 * bp as f64) * k.g_ab;
        r * factor(da, db) * Complex64::from_polar(1.0, -unitary * t)
    });
    DensityMatrix::new_unchecked(rho0.dims().to_vec(), entries)
}

/// Smallest eigenvalue of the partial transpose over mode `b`, computed on
/// the occupied levels only.
pub fn min_pt_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    if !rho.is_two_mode() {
        return Err(Error::invalid("partial transpose needs a two-mode state"));
    }
    if let Some(dev) = rho.hermiticity_violation() {
        if dev > 1e-10 || dev.is_nan() {
            return Err(Error::invalid(format!(
                "matrix not Hermitian (deviation {dev:e})"
            )));
        }
    }
    let (na, nb) = (rho.dims()[0], rho.dims()[1]);
    let mut used_a = vec![false; na];
    let mut used_b = vec![false; nb];
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            if rho.get(i, j) != Complex64::new(0.0, 0.0) {
                let (a, b) = rho.levels(i);
                let (ap, bp) = rho.levels(j);
                used_a[a] = true;
                used_a[ap] = true;
                used_b[b] = true;
                used_b[bp] = true;
            }
        }
    }
    let sa: Vec<usize> = (0..na).filter(|&a| used_a[a]).collect();
    let sb: Vec<usize> = (0..nb).filter(|&b| used_b[b]).collect();
    if sa.is_empty() {
        return Ok(0.0);
    }
    let m = sb.len();
    let dim = sa.len() * m;
    // PT[(a,b),(a',b')] = ρ[(a,b'),(a',b)]
    let pt = DMatrix::from_fn(dim, dim, |i, j| {
        let (a, b) = (sa[i / m], sb[i % m]);
        let (ap, bp) = (sa[j / m], sb[j % m]);
        rho.get(a * nb + bp, ap * nb + b)
    });
    let eig = pt.symmetric_eigen();
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// `N[ρ] = 2 max(0, −λ_min)` of the partial transpose.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    Ok(2.0 * (-min_pt_eigenvalue(rho)?).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityPoint {
    pub t: f64,
    pub negativity: f64,
    pub lambda_neg: f64,
    pub abs_c: f64,
}

/// Negativity of the evolved state over a time grid; `abs_c` is
/// `|C(da, db, t)|` for the supplied offsets.
pub fn negativity_curve(
    rho0: &DensityMatrix,
    k: &BipartiteKernel,
    offsets: (i64, i64),
    ts: &[f64],
) -> Result<Vec<NegativityPoint>> {
    ts.par_iter()
        .map(|&t| {
            let rho = evolve2(rho0, k, t)?;
            let lambda_neg = min_pt_eigenvalue(&rho)?;
            Ok(NegativityPoint {
                t,
                negativity: 2.0 * (-lambda_neg).max(0.0),
                lambda_neg,
                abs_c: k.evaluate(offsets.0, offsets.1, t).abs(),
            })
        })
        .collect()
}

/// Writes `t,negativity,lambda_neg,abs_C`.
pub fn write_negativity_csv(path: &Path, points: &[NegativityPoint]) -> Result<()> {
    let mut sink = CsvSink::create(path, &["t", "negativity", "lambda_neg", "abs_C"])?;
    for p in points {
        sink.row(&[
            fmt_f64(p.t),
            fmt_f64(p.negativity),
            fmt_f64(p.lambda_neg),
            fmt_f64(p.abs_c),
        ])?;
    }
    sink.finish()
}
