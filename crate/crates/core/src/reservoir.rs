//! Thermal reservoir of `N` resonant oscillators: coupling spectra, the
//! coupling norm `G`, and exact thermal moments of `V_R = Σ_k g_k n̂_k`.
//!
//! Spectral profiles are strategies behind [`SpectralProfile`], looked up by
//! name in a [`ProfileRegistry`] so configs can select them at runtime.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::{fmt_f64, CsvSink};

/// Number of reservoir modes and the dimensionless inverse temperature
/// `x = βħω` shared by all of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub n_modes: usize,
    pub x: f64,
}

impl ReservoirParams {
    /// `x = 0` (infinite temperature) is accepted here; operations that
    /// need a thermal state reject it themselves.
    pub fn new(n_modes: usize, x: f64) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("reservoir needs at least one mode"));
        }
        if x.is_nan() || x < 0.0 {
            return Err(Error::invalid(format!("x = βħω must be >= 0, got {x}")));
        }
        Ok(Self { n_modes, x })
    }

    /// Mean thermal occupation `1/(e^x − 1)`.
    pub fn mean_occupation(&self) -> Result<f64> {
        self.require_thermal()?;
        Ok(1.0 / self.x.exp_m1())
    }

    /// Per-mode occupation variance `e^x/(e^x − 1)² = 1/(4 sinh²(x/2))`.
    pub fn occupation_variance(&self) -> Result<f64> {
        self.require_thermal()?;
        let s = (0.5 * self.x).sinh();
        Ok(0.25 / (s * s))
    }

    pub(crate) fn require_thermal(&self) -> Result<()> {
        if self.x > 0.0 && self.x.is_finite() {
            Ok(())
        } else if self.x == 0.0 {
            Err(Error::Divergence("thermal moments diverge at x = 0".into()))
        } else {
            Err(Error::invalid(format!(
                "x must be finite and > 0, got {}",
                self.x
            )))
        }
    }
}

/// Couplings `g_{0k}`, `k = 1..=N`, with a descriptive label.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDistribution {
    couplings: Vec<f64>,
    label: String,
}

impl SpectralDistribution {
    pub fn new(couplings: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::invalid("spectrum has no couplings"));
        }
        if let Some(k) = couplings.iter().position(|g| !g.is_finite()) {
            return Err(Error::invalid(format!(
                "coupling g_{} is not finite",
                k + 1
            )));
        }
        let s = Self {
            couplings,
            label: label.into(),
        };
        let g2 = s.norm_sqr();
        if !(g2 > 0.0 && g2.is_finite()) {
            return Err(Error::invalid(format!("G² = {g2} must be finite and > 0")));
        }
        Ok(s)
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_modes(&self) -> usize {
        self.couplings.len()
    }

    /// `G² = Σ_k g_k²`, summed in ascending `k`.
    pub fn norm_sqr(&self) -> f64 {
        self.couplings.iter().map(|g| g * g).sum()
    }

    /// Writes the spectrum as CSV with columns `k,g_0k`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut sink = CsvSink::create(path, &["k", "g_0k"])?;
        for (i, g) in self.couplings.iter().enumerate() {
            sink.row(&[(i + 1).to_string(), fmt_f64(*g)])?;
        }
        sink.finish()
    }
}

/// `g_k = Ω/√N` for every mode, so `G = Ω`.
pub fn resonant_spectrum(n: usize, omega: f64) -> Result<SpectralDistribution> {
    check_profile_args(n, omega)?;
    let g = omega / (n as f64).sqrt();
    SpectralDistribution::new(vec![g; n], format!("resonant(N={n}, Omega={omega})"))
}

/// `g_k = (Ω/√N) exp[−π(k − k0)²/(2N²)]`, `k = 1..=N`.
pub fn gaussian_spectrum(n: usize, omega: f64, k0: i64) -> Result<SpectralDistribution> {
    check_profile_args(n, omega)?;
    if k0 < 0 {
        return Err(Error::invalid(format!("k0 must be >= 0, got {k0}")));
    }
    let nf = n as f64;
    let amp = omega / nf.sqrt();
    let couplings = (1..=n)
        .map(|k| {
            let d = k as f64 - k0 as f64;
            amp * (-PI * d * d / (2.0 * nf * nf)).exp()
        })
        .collect();
    SpectralDistribution::new(
        couplings,
        format!("gaussian(N={n}, Omega={omega}, k0={k0})"),
    )
}

/// Integer multiples `g_k = l_k g` of a base coupling `g`; multipliers are
/// cycled when fewer than `n` are given.
pub fn commensurate_spectrum(
    n: usize,
    g: f64,
    multipliers: &[u32],
) -> Result<SpectralDistribution> {
    check_profile_args(n, g)?;
    if multipliers.is_empty() || multipliers.iter().all(|&l| l == 0) {
        return Err(Error::invalid(
            "commensurate spectrum needs a nonzero multiplier",
        ));
    }
    let couplings = multipliers
        .iter()
        .cycle()
        .take(n)
        .map(|&l| l as f64 * g)
        .collect();
    SpectralDistribution::new(couplings, format!("commensurate(N={n}, g={g})"))
}

fn check_profile_args(n: usize, scale: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("spectrum needs N >= 1"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!(
            "coupling scale must be finite and > 0, got {scale}"
        )));
    }
    Ok(())
}

/// `G = sqrt(Σ_k g_k²)`.
pub fn coupling_norm(s: &SpectralDistribution) -> f64 {
    s.norm_sqr().sqrt()
}

/// `⟨V_R⟩ = Σ_k g_k/(e^x − 1)`.
pub fn vr_moment1(s: &SpectralDistribution, p: &ReservoirParams) -> Result<f64> {
    let n_bar = p.mean_occupation()?;
    Ok(s.couplings.iter().sum::<f64>() * n_bar)
}

/// Exact thermal `⟨V_R²⟩` for independent geometric occupations:
/// `Σ_k g_k² Var(n) + ⟨V_R⟩²`.
pub fn vr_moment2(s: &SpectralDistribution, p: &ReservoirParams) -> Result<f64> {
    let m1 = vr_moment1(s, p)?;
    Ok(vr_variance(s, p)? + m1 * m1)
}

/// `⟨V_R²⟩ − ⟨V_R⟩² = Σ_k g_k² e^x/(e^x − 1)² = G²/(4 sinh²(x/2))`.
pub fn vr_variance(s: &SpectralDistribution, p: &ReservoirParams) -> Result<f64> {
    Ok(s.norm_sqr() * p.occupation_variance()?)
}

/// The alternative second-moment form whose fluctuation term uses the raw
/// second moment `(e^x + 1)/(e^x − 1)²` instead of the variance. Kept for
/// comparison against the oracle; it over-counts by `Σ_k g_k² ⟨n⟩²`.
pub fn vr_moment2_raw_coefficient(s: &SpectralDistribution, p: &ReservoirParams) -> Result<f64> {
    let n_bar = p.mean_occupation()?;
    let second = n_bar + 2.0 * n_bar * n_bar;
    let m1 = vr_moment1(s, p)?;
    Ok(s.norm_sqr() * second + m1 * m1)
}

/// `A_n(N) = Σ_{k=1..N} (1/√(n N²)) exp[−π(k − k0)²/(n N²)]`.
pub fn a_n_constant(n: u32, big_n: usize, k0: i64) -> Result<f64> {
    if !(n == 1 || n == 2) {
        return Err(Error::invalid(format!(
            "A_n defined for n in {{1, 2}}, got {n}"
        )));
    }
    if big_n == 0 {
        return Err(Error::invalid("A_n needs N >= 1"));
    }
    let nn = n as f64 * (big_n as f64).powi(2);
    let pref = 1.0 / nn.sqrt();
    Ok((1..=big_n)
        .map(|k| {
            let d = k as f64 - k0 as f64;
            pref * (-PI * d * d / nn).exp()
        })
        .sum())
}

/// Parameters a profile may draw on; unused fields are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileArgs {
    pub n_modes: usize,
    pub omega: f64,
    pub k0: Option<i64>,
    pub multipliers: Option<Vec<u32>>,
    pub couplings: Option<Vec<f64>>,
}

/// A named family of coupling spectra.
pub trait SpectralProfile: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, args: &ProfileArgs) -> Result<SpectralDistribution>;
}

pub struct Resonant;
pub struct Gaussian;
pub struct Commensurate;
/// Explicit coupling table.
pub struct Table;

impl SpectralProfile for Resonant {
    fn name(&self) -> &'static str {
        "resonant"
    }
    fn build(&self, args: &ProfileArgs) -> Result<SpectralDistribution> {
        resonant_spectrum(args.n_modes, args.omega)
    }
}

impl SpectralProfile for Gaussian {
    fn name(&self) -> &'static str {
        "gaussian"
    }
    fn build(&self, args: &ProfileArgs) -> Result<SpectralDistribution> {
        let k0 = args
            .k0
            .ok_or_else(|| Error::Config("gaussian profile needs k0".into()))?;
        gaussian_spectrum(args.n_modes, args.omega, k0)
    }
}

impl SpectralProfile for Commensurate {
    fn name(&self) -> &'static str {
        "commensurate"
    }
    // base coupling Ω/√N, so that G = Ω when every multiplier is 1
    fn build(&self, args: &ProfileArgs) -> Result<SpectralDistribution> {
        let ls = args
            .multipliers
            .as_deref()
            .ok_or_else(|| Error::Config("commensurate profile needs multipliers".into()))?;
        check_profile_args(args.n_modes, args.omega)?;
        commensurate_spectrum(args.n_modes, args.omega / (args.n_modes as f64).sqrt(), ls)
    }
}

impl SpectralProfile for Table {
    fn name(&self) -> &'static str {
        "table"
    }
    fn build(&self, args: &ProfileArgs) -> Result<SpectralDistribution> {
        let gs = args
            .couplings
            .clone()
            .ok_or_else(|| Error::Config("table profile needs couplings".into()))?;
        if args.n_modes != 0 && args.n_modes != gs.len() {
            return Err(Error::Config(format!(
                "table has {} couplings but n_modes = {}",
                gs.len(),
                args.n_modes
            )));
        }
        SpectralDistribution::new(gs, "table")
    }
}

/// Name-indexed set of spectral profiles.
pub struct ProfileRegistry {
    profiles: BTreeMap<&'static str, Box<dyn SpectralProfile>>,
}

impl ProfileRegistry {
    pub fn empty() -> Self {
        Self {
            profiles: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, profile: Box<dyn SpectralProfile>) {
        self.profiles.insert(profile.name(), profile);
    }

    pub fn get(&self, name: &str) -> Result<&dyn SpectralProfile> {
        self.profiles
            .get(name)
            .map(|p| p.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "spectral profile",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.profiles.keys().copied().collect()
    }

    pub fn build(&self, name: &str, args: &ProfileArgs) -> Result<SpectralDistribution> {
        self.get(name)?.build(args)
    }
}

impl Default for ProfileRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Resonant));
        r.register(Box::new(Gaussian));
        r.register(Box::new(Commensurate));
        r.register(Box::new(Table));
        r
    }
}
