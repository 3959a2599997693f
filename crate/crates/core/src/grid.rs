use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// Time grid `[t_min, t_max]` with `points >= 2` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl TimeGrid {
    pub fn linear(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        let g = Self {
            t_min,
            t_max,
            points,
            spacing: Spacing::Linear,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn log(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        let g = Self {
            t_min,
            t_max,
            points,
            spacing: Spacing::Log,
        };
        g.validate()?;
        Ok(g)
    }

    /// Log grid with a fixed density of samples per decade.
    pub fn log_per_decade(t_min: f64, t_max: f64, per_decade: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) {
            return Err(Error::Config(format!("bad log range [{t_min}, {t_max}]")));
        }
        let decades = (t_max / t_min).log10();
        let points = (decades * per_decade as f64).round() as usize + 1;
        Self::log(t_min, t_max, points.max(2))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(Error::Config("time grid bounds must be finite".into()));
        }
        if self.t_min >= self.t_max {
            return Err(Error::Config(format!(
                "time grid needs t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.t_min < 0.0 {
            return Err(Error::Config("time grid must start at t >= 0".into()));
        }
        if self.points < 2 {
            return Err(Error::Config(format!(
                "time grid needs >= 2 points, got {}",
                self.points
            )));
        }
        if self.spacing == Spacing::Log && self.t_min <= 0.0 {
            return Err(Error::Config("log grid needs t_min > 0".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    return self.t_max;
                }
                let f = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.t_min + f * (self.t_max - self.t_min),
                    Spacing::Log => self.t_min * (self.t_max / self.t_min).powf(f),
                }
            })
            .collect()
    }
}
