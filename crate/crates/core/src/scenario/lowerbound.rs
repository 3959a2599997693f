//! Long-time floor `|C|²_LB` against `x` for several reservoir sizes, with
//! `x_crit(N)` marker rows.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::resolve;
use crate::dephasing::{critical_beta, log_lower_bound_abs_sq};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::output::{fmt_f64, CsvSink};
use crate::reservoir::{ProfileRegistry, ReservoirParams};
use crate::scenario::{write_sidecar, RunOutcome, Scenario};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundConfig {
    pub n_modes: Vec<usize>,
    /// Grid in `x`; reuses the time-grid layout.
    pub x_grid: TimeGrid,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        Self {
            n_modes: vec![100, 1_000, 10_000],
            x_grid: TimeGrid::linear(0.05, 20.0, 400).expect("valid default grid"),
        }
    }
}

pub struct LowerBound;

impl Scenario for LowerBound {
    fn name(&self) -> &'static str {
        "lowerbound"
    }

    fn run(
        &self,
        user: Option<&Value>,
        out: &Path,
        _profiles: &ProfileRegistry,
    ) -> Result<RunOutcome> {
        let (cfg, echo) = resolve::<LowerBoundConfig>(user)?;
        cfg.x_grid.validate()?;
        if cfg.x_grid.t_min <= 0.0 {
            return Err(Error::Config("x grid must start above 0".into()));
        }
        if cfg.n_modes.is_empty() || cfg.n_modes.contains(&0) {
            return Err(Error::Config("n_modes must list positive sizes".into()));
        }
        let xs = cfg.x_grid.values();
        let mut outcome = RunOutcome::default();
        outcome.files.push(write_sidecar(out, self.name(), &echo)?);
        let mut sink = CsvSink::create(
            out,
            &["series", "n_modes", "x", "lower_bound", "log_lower_bound"],
        )?;
        for &n in &cfg.n_modes {
            for &x in &xs {
                let l = log_lower_bound_abs_sq(&ReservoirParams::new(n, x)?);
                sink.row(&[
                    "bound".to_string(),
                    n.to_string(),
                    fmt_f64(x),
                    fmt_f64(l.exp()),
                    fmt_f64(l),
                ])?;
            }
        }
        for &n in &cfg.n_modes {
            let xc = critical_beta(n)?;
            let l = log_lower_bound_abs_sq(&ReservoirParams::new(n, xc)?);
            sink.row(&[
                "x_crit".to_string(),
                n.to_string(),
                fmt_f64(xc),
                fmt_f64(l.exp()),
                fmt_f64(l),
            ])?;
            outcome.summary.push(format!("N = {n}: x_crit = {xc:.6}"));
        }
        sink.finish()?;
        outcome.files.push(out.to_path_buf());
        Ok(outcome)
    }
}
