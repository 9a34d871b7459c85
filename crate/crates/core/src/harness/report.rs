use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::fmt_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub estimator: String,
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
    #[serde(rename = "M")]
    pub m: usize,
}

/// Monte Carlo estimates, one row per (estimator, truncation level).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
}

const HEADER: [&str; 5] = ["estimator", "n", "value", "stderr", "M"];

impl ConvergenceReport {
    pub fn get(&self, estimator: &str, n: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.n == n)
    }

    /// Rows of one estimator in schedule order.
    pub fn series(&self, estimator: &str) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.estimator == estimator).collect()
    }

    pub fn estimators(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.estimator.as_str()) {
                names.push(&r.estimator);
            }
        }
        names
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.estimator.clone(),
                r.n.to_string(),
                fmt_f64(r.value),
                fmt_f64(r.stderr),
                r.m.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<report csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        if rd.headers()?.iter().ne(HEADER) {
            return Err(Error::config(format!("report header must be `{}`", HEADER.join(","))));
        }
        let rows = rd.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(ConvergenceReport { rows })
    }
}

pub fn emit_report(report: &ConvergenceReport, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    report
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| with_path(e, path))
}

pub fn parse_report(path: &Path) -> Result<ConvergenceReport> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ConvergenceReport::read_csv(std::io::BufReader::new(file)).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}
