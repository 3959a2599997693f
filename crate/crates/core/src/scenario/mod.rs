//! Named CLI scenarios. Each one resolves its config against built-in
//! defaults, writes its outputs and a `<out stem>.config.json` echo.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::reservoir::ProfileRegistry;

pub mod certify;
pub mod characteristic;
pub mod lowerbound;
pub mod master;
pub mod negativity;
pub mod purity;

/// Files written and one-line findings for the terminal.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

pub trait Scenario: Send + Sync {
    fn name(&self) -> &'static str;

    fn run(
        &self,
        user: Option<&Value>,
        out: &Path,
        profiles: &ProfileRegistry,
    ) -> Result<RunOutcome>;
}

/// Sidecar path: `fig1.csv` → `fig1.config.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("config.json")
}

pub(crate) fn write_sidecar(out: &Path, scenario: &str, echo: &Value) -> Result<PathBuf> {
    let path = sidecar_path(out);
    let mut doc = serde_json::Map::new();
    doc.insert("scenario".into(), Value::String(scenario.into()));
    if let Value::Object(m) = echo {
        doc.extend(m.clone());
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc))
        .map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub struct ScenarioRegistry {
    scenarios: BTreeMap<&'static str, Box<dyn Scenario>>,
    profiles: ProfileRegistry,
}

impl ScenarioRegistry {
    pub fn empty(profiles: ProfileRegistry) -> Self {
        Self {
            scenarios: BTreeMap::new(),
            profiles,
        }
    }

    pub fn register(&mut self, s: Box<dyn Scenario>) {
        self.scenarios.insert(s.name(), s);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.scenarios.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Scenario> {
        self.scenarios
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownName {
                kind: "scenario",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    /// Runs `name`. A `scenario` key in the config, if present, must agree.
    pub fn run(&self, name: &str, user: Option<&Value>, out: &Path) -> Result<RunOutcome> {
        let scenario = self.get(name)?;
        let mut user = user.cloned();
        if let Some(Value::Object(m)) = user.as_mut() {
            if let Some(v) = m.remove("scenario") {
                if v.as_str() != Some(name) {
                    return Err(Error::Config(format!(
                        "config is for scenario {v}, not '{name}'"
                    )));
                }
            }
        }
        scenario.run(user.as_ref(), out, &self.profiles)
    }
}

impl Default for ScenarioRegistry {
    fn default() -> Self {
        let mut r = Self::empty(ProfileRegistry::default());
        r.register(Box::new(characteristic::Characteristic));
        r.register(Box::new(purity::Purity));
        r.register(Box::new(lowerbound::LowerBound));
        r.register(Box::new(negativity::Negativity));
        r.register(Box::new(master::MasterEq));
        r.register(Box::new(certify::Certify));
        r
    }
}
