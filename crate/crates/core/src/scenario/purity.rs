//! Purity curves of several initial states under one reservoir, with a
//! marker row at `τ_D`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{resolve, ReservoirSpec, StateSpec};
use crate::error::{Error, Result};
use crate::evolution::{purity_curve, EvolutionConfig};
use crate::grid::TimeGrid;
use crate::output::{fmt_f64, CsvSink};
use crate::reservoir::ProfileRegistry;
use crate::scenario::{write_sidecar, RunOutcome, Scenario};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedState {
    pub name: String,
    pub state: StateSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurityConfig {
    pub reservoir: ReservoirSpec,
    pub states: Vec<NamedState>,
    /// Grid in `Ω·t`.
    pub grid: TimeGrid,
}

impl Default for PurityConfig {
    fn default() -> Self {
        Self {
            reservoir: ReservoirSpec::gaussian(100, 0.1125, 50, 0.01),
            states: vec![
                NamedState {
                    name: "cat".into(),
                    state: StateSpec::cat(2.0),
                },
                NamedState {
                    name: "fock".into(),
                    state: StateSpec::Fock { m1: 1, m2: 2 },
                },
            ],
            grid: TimeGrid::log(1e-4, 1e1, 1001).expect("valid default grid"),
        }
    }
}

pub struct Purity;

impl Scenario for Purity {
    fn name(&self) -> &'static str {
        "purity"
    }

    fn run(
        &self,
        user: Option<&Value>,
        out: &Path,
        profiles: &ProfileRegistry,
    ) -> Result<RunOutcome> {
        let (cfg, echo) = resolve::<PurityConfig>(user)?;
        cfg.grid.validate()?;
        if cfg.states.is_empty() {
            return Err(Error::Config("at least one state is required".into()));
        }
        let kernel = cfg.reservoir.kernel(profiles)?;
        let unit = cfg.reservoir.time_unit(kernel.spectrum());
        let dists = cfg
            .states
            .iter()
            .map(|s| s.state.distribution())
            .collect::<Result<Vec<_>>>()?;
        let tau = kernel.decoherence_time();
        let evo = EvolutionConfig::for_purity(kernel);

        let mut scaled = vec![0.0];
        scaled.extend(cfg.grid.values());
        let ts: Vec<f64> = scaled.iter().map(|s| s * unit).collect();

        let mut outcome = RunOutcome::default();
        outcome.files.push(write_sidecar(out, self.name(), &echo)?);
        let mut sink = CsvSink::create(out, &["series", "scaled_t", "t", "purity"])?;
        for (named, dist) in cfg.states.iter().zip(&dists) {
            let curve = purity_curve(dist, &evo, &ts);
            for (s, (t, p)) in scaled.iter().zip(&curve) {
                sink.row(&[named.name.clone(), fmt_f64(*s), fmt_f64(*t), fmt_f64(*p)])?;
            }
            outcome.summary.push(format!(
                "{}: P(0) = {:.6}, P(end) = {:.6}, P(inf) = {:.6}",
                named.name,
                curve[0].1,
                curve[curve.len() - 1].1,
                dist.dephased_purity()
            ));
        }
        sink.row(&[
            "tau_d".to_string(),
            fmt_f64(tau / unit),
            fmt_f64(tau),
            String::new(),
        ])?;
        sink.finish()?;
        outcome.files.push(out.to_path_buf());
        outcome
            .summary
            .push(format!("Omega*tau_D = {:.6e}", tau / unit));
        Ok(outcome)
    }
}
