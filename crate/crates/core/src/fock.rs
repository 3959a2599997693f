//! Fock-basis states: truncated photon distributions and density matrices
//! over one or two bosonic modes.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tail mass discarded when truncating an infinite Fock expansion.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
/// Hard cap on the truncation index of any constructed distribution.
pub const MAX_FOCK_INDEX: usize = 512;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const NEG_DIAG_TOL: f64 = 1e-12;

/// Amplitudes `p(n)`, `n = 0..=n_max`, of a pure single-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    amps: Vec<Complex64>,
}

impl PhotonDistribution {
    /// Builds a distribution from raw amplitudes and renormalizes it.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::invalid(
                "photon distribution needs at least one amplitude",
            ));
        }
        if amps.len() > MAX_FOCK_INDEX + 1 {
            return Err(Error::TruncationOverflow {
                cap: MAX_FOCK_INDEX,
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("non-finite amplitude"));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("zero state vector"));
        }
        Ok(Self {
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    /// Photon-number probabilities `|p(n)|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Purity of the fully dephased state, `Σ_n |p(n)|⁴`.
    pub fn dephased_purity(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr().powi(2)).sum()
    }
}

/// Even cat state `(|α⟩ + |−α⟩)/√(2(1 + e^{−2|α|²}))`, truncated once the
/// discarded tail mass drops below `tail_tol`.
pub fn cat_state(alpha: Complex64, tail_tol: f64) -> Result<PhotonDistribution> {
    if !(tail_tol > 0.0 && tail_tol <= 1e-6) {
        return Err(Error::invalid(format!(
            "tail_tol must lie in (0, 1e-6], got {tail_tol}"
        )));
    }
    let n_max = cat_truncation(alpha, tail_tol)?;
    cat_state_truncated(alpha, n_max)
}

/// Cat state cut at an explicit truncation index.
pub fn cat_state_truncated(alpha: Complex64, n_max: usize) -> Result<PhotonDistribution> {
    if n_max > MAX_FOCK_INDEX {
        return Err(Error::TruncationOverflow {
            cap: MAX_FOCK_INDEX,
        });
    }
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::invalid("non-finite cat amplitude"));
    }
    let amps = (0..=n_max)
        .map(|n| {
            if n % 2 == 1 {
                Complex64::new(0.0, 0.0)
            } else {
                cat_amplitude(alpha, n)
            }
        })
        .collect();
    PhotonDistribution::from_amplitudes(amps)
}

/// `(|m1⟩ + |m2⟩)/√2`.
pub fn fock_superposition(m1: usize, m2: usize) -> Result<PhotonDistribution> {
    if m1 == m2 {
        return Err(Error::invalid("fock superposition needs m1 != m2"));
    }
    let n_max = m1.max(m2);
    if n_max > MAX_FOCK_INDEX {
        return Err(Error::TruncationOverflow {
            cap: MAX_FOCK_INDEX,
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[m1] = a;
    amps[m2] = a;
    Ok(PhotonDistribution { amps })
}

/// Single Fock state `|n⟩`.
pub fn fock_state(n: usize) -> Result<PhotonDistribution> {
    if n > MAX_FOCK_INDEX {
        return Err(Error::TruncationOverflow {
            cap: MAX_FOCK_INDEX,
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); n + 1];
    amps[n] = Complex64::new(1.0, 0.0);
    Ok(PhotonDistribution { amps })
}

// Exact normalized amplitude of an even-n component, evaluated in the log
// domain so that e^{−|α|²/2} and αⁿ/√n! never overflow separately.
fn cat_amplitude(alpha: Complex64, n: usize) -> Complex64 {
    let r2 = alpha.norm_sqr();
    if r2 == 0.0 {
        return if n == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let ln_norm = 0.5 * (2.0 * (1.0 + (-2.0 * r2).exp())).ln();
    let ln_mag =
        n as f64 * alpha.norm().ln() - 0.5 * ln_fact - 0.5 * r2 + std::f64::consts::LN_2 - ln_norm;
    Complex64::from_polar(ln_mag.exp(), n as f64 * alpha.arg())
}

// Smallest even n_max whose discarded tail is provably below `tol`. Past the
// peak (n > |α|²) successive even terms shrink by at most
// r = |α|⁴/((n+1)(n+2)), so the tail is bounded by a geometric series.
fn cat_truncation(alpha: Complex64, tol: f64) -> Result<usize> {
    let r2 = alpha.norm_sqr();
    if r2 == 0.0 {
        return Ok(0);
    }
    let mut n = 0usize;
    loop {
        let next = n + 2;
        if next > MAX_FOCK_INDEX + 1 {
            return Err(Error::TruncationOverflow {
                cap: MAX_FOCK_INDEX,
            });
        }
        if (next as f64) > r2 {
            let head = cat_amplitude(alpha, next).norm_sqr();
            let ratio = r2 * r2 / ((next as f64 + 1.0) * (next as f64 + 2.0));
            if ratio < 1.0 && head / (1.0 - ratio) < tol {
                return Ok(n);
            }
        }
        n = next;
    }
}

/// Density matrix over the product Fock basis of one or two modes.
///
/// Two-mode entries are indexed by `m_a * dims[1] + m_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Wraps a matrix, checking Hermiticity, unit trace and non-negative
    /// populations.
    pub fn new(dims: Vec<usize>, entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::new_unchecked(dims, entries)?;
        rho.validate()?;
        Ok(rho)
    }

    // Shape checks only; used for intermediate matrices that are valid by
    // construction.
    pub(crate) fn new_unchecked(dims: Vec<usize>, entries: DMatrix<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 || dims.contains(&0) {
            return Err(Error::invalid(format!(
                "unsupported mode dimensions {dims:?}"
            )));
        }
        let total: usize = dims.iter().product();
        if entries.nrows() != total || entries.ncols() != total {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, dims {dims:?} need {total}x{total}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { dims, entries })
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(dev) = self.hermiticity_violation() {
            if dev > HERMITIAN_TOL || dev.is_nan() {
                return Err(Error::invalid(format!(
                    "matrix not Hermitian (deviation {dev:e})"
                )));
            }
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL || !tr.is_finite() {
            return Err(Error::invalid(format!("trace {tr} != 1")));
        }
        for i in 0..self.entries.nrows() {
            let d = self.entries[(i, i)];
            if d.re < -NEG_DIAG_TOL || d.im.abs() > HERMITIAN_TOL {
                return Err(Error::invalid(format!(
                    "invalid population {d} at index {i}"
                )));
            }
        }
        Ok(())
    }

    /// Largest elementwise `|ρ_ij − conj(ρ_ji)|`, `None` for an empty matrix.
    pub fn hermiticity_violation(&self) -> Option<f64> {
        let n = self.entries.nrows();
        let mut worst: Option<f64> = None;
        for i in 0..n {
            for j in i..n {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = Some(worst.map_or(d, |w| if d > w || d.is_nan() { d } else { w }));
            }
        }
        worst
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn is_single_mode(&self) -> bool {
        self.dims.len() == 1
    }

    pub fn is_two_mode(&self) -> bool {
        self.dims.len() == 2
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|z| z.re).collect()
    }

    /// Mean total excitation number `Σ_i n(i) ρ_ii`; for two modes `n = m_a + m_b`.
    pub fn mean_excitation(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.level_sum(i) as f64 * self.entries[(i, i)].re)
            .sum()
    }

    /// Splits a flat index into per-mode Fock numbers.
    pub fn levels(&self, index: usize) -> (usize, usize) {
        match self.dims.as_slice() {
            [_] => (index, 0),
            [_, nb] => (index / nb, index % nb),
            _ => unreachable!("dims validated at construction"),
        }
    }

    fn level_sum(&self, index: usize) -> usize {
        let (a, b) = self.levels(index);
        a + b
    }
}

/// `ρ_{m,m'} = p(m) p*(m')`.
pub fn density_from_pure(dist: &PhotonDistribution) -> DensityMatrix {
    let amps = dist.amplitudes();
    let n = amps.len();
    let entries = DMatrix::from_fn(n, n, |i, j| amps[i] * amps[j].conj());
    DensityMatrix {
        dims: vec![n],
        entries,
    }
}

/// Two-mode pure state from `(m_a, m_b, amplitude)` components, normalized.
/// Mode dimensions are the smallest that hold every listed level.
pub fn two_mode_pure(components: &[(usize, usize, Complex64)]) -> Result<DensityMatrix> {
    if components.is_empty() {
        return Err(Error::invalid(
            "two-mode state needs at least one component",
        ));
    }
    let na = components.iter().map(|c| c.0).max().unwrap_or(0) + 1;
    let nb = components.iter().map(|c| c.1).max().unwrap_or(0) + 1;
    if na > MAX_FOCK_INDEX + 1 || nb > MAX_FOCK_INDEX + 1 {
        return Err(Error::TruncationOverflow {
            cap: MAX_FOCK_INDEX,
        });
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); na * nb];
    for &(a, b, amp) in components {
        psi[a * nb + b] += amp;
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::invalid("degenerate two-mode state vector"));
    }
    psi.iter_mut().for_each(|z| *z /= norm);
    let n = psi.len();
    let entries = DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
    Ok(DensityMatrix {
        dims: vec![na, nb],
        entries,
    })
}

/// `(|n n⟩ + |m m⟩)/√2`.
pub fn bell_like(n: usize, m: usize) -> Result<DensityMatrix> {
    if n == m {
        return Err(Error::invalid("bell-like state needs n != m"));
    }
    let a = Complex64::new(1.0, 0.0);
    two_mode_pure(&[(n, n, a), (m, m, a)])
}

/// `Tr ρ² = Σ |ρ_ij|²` for Hermitian ρ.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries.iter().map(|z| z.norm_sqr()).sum()
}
