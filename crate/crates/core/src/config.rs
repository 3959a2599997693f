//! JSON run configuration. A user file is merged over the scenario's
//! defaults, so it only needs the keys it changes; the merged result is
//! echoed next to every output.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dephasing::CharacteristicKernel;
use crate::error::{Error, Result};
use crate::fock::{cat_state, fock_superposition, PhotonDistribution, DEFAULT_TAIL_TOL};
use crate::reservoir::{ProfileArgs, ProfileRegistry, ReservoirParams, SpectralDistribution};

/// Reservoir: profile name plus whatever that profile needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSpec {
    pub profile: String,
    pub n_modes: usize,
    pub x: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multipliers: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
}

impl ReservoirSpec {
    pub fn resonant(n_modes: usize, omega: f64, x: f64) -> Self {
        Self {
            profile: "resonant".into(),
            n_modes,
            x,
            omega,
            k0: None,
            multipliers: None,
            couplings: None,
        }
    }

    pub fn gaussian(n_modes: usize, omega: f64, k0: i64, x: f64) -> Self {
        Self {
            profile: "gaussian".into(),
            k0: Some(k0),
            ..Self::resonant(n_modes, omega, x)
        }
    }

    pub fn spectrum(&self, registry: &ProfileRegistry) -> Result<SpectralDistribution> {
        let args = ProfileArgs {
            n_modes: self.n_modes,
            omega: self.omega,
            k0: self.k0,
            multipliers: self.multipliers.clone(),
            couplings: self.couplings.clone(),
        };
        registry.build(&self.profile, &args)
    }

    pub fn params(&self, spectrum: &SpectralDistribution) -> Result<ReservoirParams> {
        ReservoirParams::new(spectrum.n_modes(), self.x)
    }

    pub fn kernel(&self, registry: &ProfileRegistry) -> Result<CharacteristicKernel> {
        let s = self.spectrum(registry)?;
        let p = self.params(&s)?;
        CharacteristicKernel::new(s, p)
    }

    /// Time unit `1/Ω`; falls back to `1/G` when no `Ω` is given.
    pub fn time_unit(&self, spectrum: &SpectralDistribution) -> f64 {
        if self.omega > 0.0 {
            1.0 / self.omega
        } else {
            1.0 / spectrum.norm_sqr().sqrt()
        }
    }
}

/// Initial single-mode state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    /// Even cat state with complex amplitude `alpha_re + i alpha_im`.
    Cat {
        alpha_re: f64,
        #[serde(default)]
        alpha_im: f64,
        #[serde(default = "default_tail_tol")]
        tail_tol: f64,
    },
    /// `(|m1⟩ + |m2⟩)/√2`.
    Fock { m1: usize, m2: usize },
}

fn default_tail_tol() -> f64 {
    DEFAULT_TAIL_TOL
}

impl StateSpec {
    pub fn cat(alpha: f64) -> Self {
        StateSpec::Cat {
            alpha_re: alpha,
            alpha_im: 0.0,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }

    pub fn distribution(&self) -> Result<PhotonDistribution> {
        match *self {
            StateSpec::Cat {
                alpha_re,
                alpha_im,
                tail_tol,
            } => cat_state(Complex64::new(alpha_re, alpha_im), tail_tol),
            StateSpec::Fock { m1, m2 } => fock_superposition(m1, m2),
        }
    }
}

/// Recursively overlays `patch` on `base`. Objects merge key by key; any
/// other value replaces. An object whose `kind` tag changes replaces the
/// base object outright.
pub fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) if !kind_changes(slot, v) => merge(slot, v),
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

fn kind_changes(base: &Value, patch: &Value) -> bool {
    match (base.get("kind"), patch.get("kind")) {
        (Some(a), Some(b)) => a != b,
        _ => false,
    }
}

/// Merges `user` over `T::default()` and returns the typed config together
/// with its canonical JSON echo.
pub fn resolve<T>(user: Option<&Value>) -> Result<(T, Value)>
where
    T: Default + Serialize + DeserializeOwned,
{
    let mut merged =
        serde_json::to_value(T::default()).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(u) = user {
        if !u.is_object() {
            return Err(Error::Config("config root must be a JSON object".into()));
        }
        merge(&mut merged, u);
    }
    let typed: T = serde_json::from_value(merged).map_err(|e| Error::Config(e.to_string()))?;
    let echo = serde_json::to_value(&typed).map_err(|e| Error::Config(e.to_string()))?;
    Ok((typed, echo))
}

pub fn load_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
