//! `|C|²` against `delta·Ω·t` for several reservoirs on a shared log grid.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{resolve, ReservoirSpec};
use crate::dephasing::{curve_fields, CharacteristicKernel};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::output::{fmt_f64, CsvSink};
use crate::reservoir::{ProfileRegistry, SpectralDistribution};
use crate::scenario::{write_sidecar, RunOutcome, Scenario};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub name: String,
    pub reservoir: ReservoirSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacteristicConfig {
    pub delta: i64,
    /// Grid in `delta·Ω·t`.
    pub grid: TimeGrid,
    /// Adds the exact recurrence instants of commensurate spectra.
    pub include_recurrences: bool,
    pub series: Vec<Series>,
}

impl Default for CharacteristicConfig {
    fn default() -> Self {
        Self {
            delta: 1,
            grid: TimeGrid::log(1e-2, 1e3, 2001).expect("valid default grid"),
            include_recurrences: true,
            series: vec![
                Series {
                    name: "resonant".into(),
                    reservoir: ReservoirSpec::resonant(100, 0.1, 1.0),
                },
                Series {
                    name: "gaussian".into(),
                    reservoir: ReservoirSpec::gaussian(100, 0.1125, 50, 1.0),
                },
            ],
        }
    }
}

/// Smallest `T > 0` with every `g_k T` a multiple of `2π`, if all couplings
/// are integer multiples of the smallest one.
pub fn recurrence_period(s: &SpectralDistribution) -> Option<f64> {
    let base = s
        .couplings()
        .iter()
        .copied()
        .filter(|g| *g > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !base.is_finite() {
        return None;
    }
    let commensurate = s.couplings().iter().all(|g| {
        let r = g / base;
        (r - r.round()).abs() < 1e-9
    });
    commensurate.then(|| 2.0 * PI / base)
}

pub struct SeriesCurve {
    pub name: String,
    pub kernel: CharacteristicKernel,
    /// `(delta·Ω·t, t)` pairs.
    pub times: Vec<(f64, f64)>,
}

/// Builds each series' kernel and time list: `t = 0`, the grid and,
/// optionally, recurrence instants inside the grid range.
pub fn prepare(cfg: &CharacteristicConfig, profiles: &ProfileRegistry) -> Result<Vec<SeriesCurve>> {
    cfg.grid.validate()?;
    if cfg.delta == 0 {
        return Err(Error::Config("delta must be nonzero".into()));
    }
    if cfg.series.is_empty() {
        return Err(Error::Config("at least one series is required".into()));
    }
    let d = cfg.delta.unsigned_abs() as f64;
    let mut out = Vec::with_capacity(cfg.series.len());
    for s in &cfg.series {
        let kernel = s.reservoir.kernel(profiles)?;
        let unit = s.reservoir.time_unit(kernel.spectrum());
        let mut scaled = vec![0.0];
        scaled.extend(cfg.grid.values());
        if cfg.include_recurrences {
            if let Some(period) = recurrence_period(kernel.spectrum()) {
                // delta·t_n = 2πn/g  ⇒  scaled = 2πn/(g·unit)
                let step = period / unit;
                let mut n = 1.0;
                while n * step <= cfg.grid.t_max {
                    if n * step >= cfg.grid.t_min {
                        scaled.push(n * step);
                    }
                    n += 1.0;
                }
            }
        }
        scaled.sort_by(f64::total_cmp);
        scaled.dedup();
        let times = scaled.into_iter().map(|s| (s, s * unit / d)).collect();
        out.push(SeriesCurve {
            name: s.name.clone(),
            kernel,
            times,
        });
    }
    Ok(out)
}

pub struct Characteristic;

impl Scenario for Characteristic {
    fn name(&self) -> &'static str {
        "characteristic"
    }

    fn run(
        &self,
        user: Option<&Value>,
        out: &Path,
        profiles: &ProfileRegistry,
    ) -> Result<RunOutcome> {
        let (cfg, echo) = resolve::<CharacteristicConfig>(user)?;
        let series = prepare(&cfg, profiles)?;
        let mut outcome = RunOutcome::default();
        outcome.files.push(write_sidecar(out, self.name(), &echo)?);
        let mut sink = CsvSink::create(
            out,
            &[
                "series",
                "scaled_t",
                "t",
                "delta",
                "abs_sq",
                "log_abs_sq",
                "phase",
            ],
        )?;
        for s in &series {
            let ts: Vec<f64> = s.times.iter().map(|p| p.1).collect();
            let points = s.kernel.curve(cfg.delta, &ts);
            let mut floor = f64::INFINITY;
            for ((scaled, _), p) in s.times.iter().zip(&points) {
                floor = floor.min(p.value.log_abs_sq);
                let [t, delta, abs_sq, log_abs_sq, phase] = curve_fields(p);
                sink.row(&[
                    s.name.clone(),
                    fmt_f64(*scaled),
                    t,
                    delta,
                    abs_sq,
                    log_abs_sq,
                    phase,
                ])?;
            }
            outcome.summary.push(format!(
                "{}: min ln|C|^2 = {floor:.6e}, ln LB = {:.6e}",
                s.name,
                crate::dephasing::log_lower_bound_abs_sq(s.kernel.params())
            ));
        }
        sink.finish()?;
        outcome.files.push(out.to_path_buf());
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::{gaussian_spectrum, resonant_spectrum};

    #[test]
    fn periods() {
        let s = resonant_spectrum(100, 0.1).unwrap();
        let p = recurrence_period(&s).unwrap();
        assert!((p - 2.0 * PI / 0.01).abs() < 1e-9);
        assert!(recurrence_period(&gaussian_spectrum(100, 0.1125, 50).unwrap()).is_none());
    }

    #[test]
    fn default_grid_contains_recurrences() {
        let series = prepare(
            &CharacteristicConfig::default(),
            &ProfileRegistry::default(),
        )
        .unwrap();
        let res = &series[0];
        assert_eq!(res.times[0], (0.0, 0.0));
        let hits = res
            .times
            .iter()
            .filter(|(_, t)| res.kernel.abs_sq(1, *t) > 1.0 - 1e-9 && *t > 0.0)
            .count();
        // 2π√N·n ≤ 10³ for n = 1..=15
        assert_eq!(hits, 15);
    }
}
