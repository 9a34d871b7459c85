use std::fmt;
use std::path::{Path, PathBuf};

use crate::basis::EnumerationOrder;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::ogawa::{validate_schedule, ProjectorSequence};
use crate::path::TimeGrid;

pub const KEYS: [&str; 10] = [
    "field", "basis.a", "basis.b", "order.a", "order.b", "grid", "paths", "seed", "schedule", "out",
];

/// Experiment description, read from flat `key = value` text (`#` starts a comment).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub basis_a: String,
    pub basis_b: Option<String>,
    pub order_a: EnumerationOrder,
    pub order_b: EnumerationOrder,
    pub grid: usize,
    pub paths: usize,
    pub seed: u64,
    pub schedule: Vec<usize>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            field: FieldSpec::Linear(crate::field::LinearField::new(1.0, 1.0, 1.0, 1.0)),
            basis_a: "psi-trig".to_string(),
            basis_b: None,
            order_a: EnumerationOrder::Balanced,
            order_b: EnumerationOrder::Balanced,
            grid: 4096,
            paths: 10_000,
            seed: 0,
            schedule: vec![4, 16, 64, 256],
            out: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("`{key}`: cannot parse `{value}`")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if seen.contains(&key) {
                return Err(Error::config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            seen.push(key);
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Apply one `key = value` setting (also used for command-line overrides).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "field" => self.field = value.parse()?,
            "basis.a" => self.basis_a = value.to_string(),
            "basis.b" => self.basis_b = (!value.is_empty() && value != "none").then(|| value.to_string()),
            "order.a" => self.order_a = value.parse()?,
            "order.b" => self.order_b = value.parse()?,
            "grid" => self.grid = parse_num(key, value)?,
            "paths" => self.paths = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "schedule" => {
                self.schedule = value
                    .split(',')
                    .map(|v| parse_num(key, v.trim()))
                    .collect::<Result<_>>()?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            _ => {
                return Err(Error::config(format!(
                    "unknown key `{key}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.grid).map_err(|e| Error::config(e.to_string()))
    }

    pub fn sequence_a(&self) -> Result<ProjectorSequence> {
        ProjectorSequence::parse(&self.basis_a, self.order_a, self.field.dim())
    }

    pub fn sequence_b(&self) -> Result<Option<ProjectorSequence>> {
        self.basis_b
            .as_deref()
            .map(|b| ProjectorSequence::parse(b, self.order_b, self.field.dim()))
            .transpose()
    }

    /// Resolve every name and check sizes without running anything.
    pub fn validate(&self) -> Result<()> {
        let grid = self.time_grid()?;
        if self.paths == 0 {
            return Err(Error::config("`paths` must be >= 1"));
        }
        validate_schedule(&self.schedule)?;
        let max = *self.schedule.last().unwrap();
        for seq in std::iter::once(self.sequence_a()?).chain(self.sequence_b()?) {
            match seq {
                ProjectorSequence::Prefix(family) => {
                    if let Some(len) = family.len() {
                        if max > len {
                            return Err(Error::BasisExhausted {
                                family: family.to_string(),
                                requested: max,
                                available: len,
                            });
                        }
                    }
                }
                ProjectorSequence::PiecewiseLinearLevels { .. } => {
                    if let Some(&bad) = self.schedule.iter().find(|&&l| !grid.num_steps().is_multiple_of(l)) {
                        return Err(Error::config(format!(
                            "piecewise-linear level {bad} does not divide the grid ({} steps)",
                            grid.num_steps()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The same config with `out` cleared: what determines the numbers.
    pub fn canonical(&self) -> String {
        ExperimentConfig {
            out: None,
            ..self.clone()
        }
        .to_string()
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "field = {}", self.field)?;
        writeln!(f, "basis.a = {}", self.basis_a)?;
        writeln!(f, "order.a = {}", self.order_a)?;
        if let Some(b) = &self.basis_b {
            writeln!(f, "basis.b = {b}")?;
            writeln!(f, "order.b = {}", self.order_b)?;
        }
        writeln!(f, "grid = {}", self.grid)?;
        writeln!(f, "paths = {}", self.paths)?;
        writeln!(f, "seed = {}", self.seed)?;
        let sched: Vec<String> = self.schedule.iter().map(usize::to_string).collect();
        writeln!(f, "schedule = {}", sched.join(","))?;
        if let Some(out) = &self.out {
            writeln!(f, "out = {}", out.display())?;
        }
        Ok(())
    }
}
