//! Versioned file of pilot-calibrated reference values (TOML), rewritten only
//! by the explicit `oracle` command.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{ConvergenceReport, ReportRow};
use crate::error::{Error, Result};

pub const EXPECTATIONS_VERSION: u32 = 1;

const HEADER: &str = "# Reference values written by `ogawa oracle`; do not edit by hand.\n\n";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedExperiment {
    pub name: String,
    /// Canonical config text that produced `rows`.
    pub config: String,
    #[serde(default, rename = "row")]
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectations {
    pub version: u32,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExpectedExperiment>,
}

impl Default for Expectations {
    fn default() -> Self {
        Expectations {
            version: EXPECTATIONS_VERSION,
            experiments: Vec::new(),
        }
    }
}

/// A report value outside the `3·sqrt(se² + se_ref²)` band of its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub estimator: String,
    pub n: usize,
    pub expected: f64,
    pub found: Option<f64>,
    pub band: f64,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.found {
            Some(v) => write!(
                f,
                "{} n={}: {v:.6e} outside {:.6e} ± {:.3e}",
                self.estimator, self.n, self.expected, self.band
            ),
            None => write!(f, "{} n={}: missing from report", self.estimator, self.n),
        }
    }
}

impl Expectations {
    pub fn parse(text: &str) -> Result<Self> {
        let exp: Expectations = toml::from_str(text).map_err(|e| Error::Expectations(e.to_string()))?;
        if exp.version != EXPECTATIONS_VERSION {
            return Err(Error::Expectations(format!(
                "version {} (supported: {EXPECTATIONS_VERSION})",
                exp.version
            )));
        }
        Ok(exp)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Missing file means no expectations yet.
    pub fn load_or_default(path: &Path) -> Result<Self> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Self::default())
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).map_err(|e| Error::Expectations(e.to_string()))?;
        std::fs::write(path, format!("{HEADER}{text}")).map_err(|e| Error::io(path, e))
    }

    pub fn get(&self, name: &str) -> Option<&ExpectedExperiment> {
        self.experiments.iter().find(|e| e.name == name)
    }

    /// The entry recorded for exactly this configuration.
    pub fn for_config(&self, cfg: &ExperimentConfig) -> Option<&ExpectedExperiment> {
        let canonical = cfg.canonical();
        self.experiments.iter().find(|e| e.config == canonical)
    }

    pub fn record(&mut self, name: &str, cfg: &ExperimentConfig, report: &ConvergenceReport) {
        let entry = ExpectedExperiment {
            name: name.to_string(),
            config: cfg.canonical(),
            rows: report.rows.clone(),
        };
        match self.experiments.iter_mut().find(|e| e.name == name) {
            Some(e) => *e = entry,
            None => self.experiments.push(entry),
        }
    }
}

impl ExpectedExperiment {
    pub fn compare(&self, report: &ConvergenceReport) -> Vec<Mismatch> {
        self.rows
            .iter()
            .filter_map(|want| {
                let got = report.get(&want.estimator, want.n);
                let band = 3.0 * got.map_or(want.stderr, |g| g.stderr.hypot(want.stderr));
                let ok = got.is_some_and(|g| (g.value - want.value).abs() <= band);
                (!ok).then(|| Mismatch {
                    estimator: want.estimator.clone(),
                    n: want.n,
                    expected: want.value,
                    found: got.map(|g| g.value),
                    band,
                })
            })
            .collect()
    }
}
