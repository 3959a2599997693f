//! Negativity of an evolved Bell-like two-mode state.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bipartite::{negativity_curve, write_negativity_csv, BipartiteKernel};
use crate::config::{resolve, ReservoirSpec};
use crate::error::{Error, Result};
use crate::fock::bell_like;
use crate::grid::TimeGrid;
use crate::reservoir::ProfileRegistry;
use crate::scenario::{write_sidecar, RunOutcome, Scenario};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellSpec {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativityConfig {
    /// Couplings of mode a; also those of mode b unless `reservoir_b` is set.
    pub reservoir: ReservoirSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservoir_b: Option<ReservoirSpec>,
    pub state: BellSpec,
    pub omega_a: f64,
    pub omega_b: f64,
    pub g_ab: f64,
    /// Grid in `Ω·t`.
    pub grid: TimeGrid,
}

impl Default for NegativityConfig {
    fn default() -> Self {
        Self {
            reservoir: ReservoirSpec::resonant(100, 0.1, 0.01),
            reservoir_b: None,
            state: BellSpec { n: 1, m: 2 },
            omega_a: 0.0,
            omega_b: 0.0,
            g_ab: 0.0,
            grid: TimeGrid::linear(0.0, 0.02, 401).expect("valid default grid"),
        }
    }
}

impl NegativityConfig {
    pub fn kernel(&self, profiles: &ProfileRegistry) -> Result<BipartiteKernel> {
        let sa = self.reservoir.spectrum(profiles)?;
        let params = self.reservoir.params(&sa)?;
        let sb = match &self.reservoir_b {
            Some(b) => {
                if b.x != self.reservoir.x {
                    return Err(Error::Config(
                        "both modes must see the same reservoir temperature".into(),
                    ));
                }
                b.spectrum(profiles)?
            }
            None => sa.clone(),
        };
        BipartiteKernel::new(sa, sb, params)?.with_system(self.omega_a, self.omega_b, self.g_ab)
    }

    /// Offsets `(n − m, n − m)` of the Bell coherence.
    pub fn offsets(&self) -> (i64, i64) {
        let d = self.state.n as i64 - self.state.m as i64;
        (d, d)
    }
}

pub struct Negativity;

impl Scenario for Negativity {
    fn name(&self) -> &'static str {
        "negativity"
    }

    fn run(
        &self,
        user: Option<&Value>,
        out: &Path,
        profiles: &ProfileRegistry,
    ) -> Result<RunOutcome> {
        let (cfg, echo) = resolve::<NegativityConfig>(user)?;
        cfg.grid.validate()?;
        let kernel = cfg.kernel(profiles)?;
        let rho0 = bell_like(cfg.state.n, cfg.state.m)?;
        let unit = cfg.reservoir.time_unit(kernel.spectrum_a());
        let ts: Vec<f64> = cfg.grid.values().iter().map(|s| s * unit).collect();
        let offsets = cfg.offsets();
        let points = negativity_curve(&rho0, &kernel, offsets, &ts)?;

        let mut outcome = RunOutcome::default();
        outcome.files.push(write_sidecar(out, self.name(), &echo)?);
        write_negativity_csv(out, &points)?;
        outcome.files.push(out.to_path_buf());
        let worst = points
            .iter()
            .map(|p| (p.negativity - p.abs_c).abs())
            .fold(0.0, f64::max);
        outcome.summary.push(format!(
            "tau_ab = {:.6e}, max |negativity - |C|| = {worst:.3e}",
            kernel.tau_ab(offsets.0, offsets.1).as_f64()
        ));
        Ok(outcome)
    }
}
