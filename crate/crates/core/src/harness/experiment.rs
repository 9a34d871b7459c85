use std::io::Write;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{ConvergenceReport, ReportRow};
use crate::error::{Error, Result};
use crate::field::{gaussian_ramer_check, ConstantField, MatrixField, RamerEstimate, RamerRhs, SineField, VectorField};
use crate::ogawa::{
    build_ledger, half_divergence_integral, ito_integral, renormalization_trajectory, stratonovich_integral,
    OgawaLedger, ProjectorSequence,
};
use crate::path::{fmt_f64, sample_brownian, RngSpec, SamplePath};
use crate::quadrature::mean_and_stderr;

/// Ledgers of one path under basis a (and b when configured).
#[derive(Debug, Clone)]
pub struct PathLedgers {
    pub a: OgawaLedger,
    pub b: Option<OgawaLedger>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceRun {
    pub report: ConvergenceReport,
    pub ledgers: Vec<PathLedgers>,
}

type Statistic = fn(&PathLedgers, usize) -> f64;

fn sq(x: f64) -> f64 {
    x * x
}

fn catalog(with_b: bool) -> Vec<(&'static str, Statistic)> {
    let mut c: Vec<(&'static str, Statistic)> = Vec::new();
    if with_b {
        c.push(("h_a-h_b", |l, i| {
            sq(l.a.entries[i].h - l.b.as_ref().unwrap().entries[i].h)
        }));
    }
    c.extend([
        (
            "g_a-gprime_a",
            (|l, i| sq(l.a.entries[i].g - l.a.entries[i].gprime)) as Statistic,
        ),
        ("gprime_a-strat", |l, i| sq(l.a.entries[i].gprime - l.a.strat)),
        ("h_a-ito", |l, i| sq(l.a.entries[i].h - l.a.ito)),
        ("g_a-strat", |l, i| sq(l.a.entries[i].g - l.a.strat)),
    ]);
    if with_b {
        c.extend([
            (
                "g_b-gprime_b",
                (|l, i| {
                    let b = l.b.as_ref().unwrap();
                    sq(b.entries[i].g - b.entries[i].gprime)
                }) as Statistic,
            ),
            ("gprime_b-strat", |l, i| {
                let b = l.b.as_ref().unwrap();
                sq(b.entries[i].gprime - b.strat)
            }),
            ("h_b-ito", |l, i| {
                let b = l.b.as_ref().unwrap();
                sq(b.entries[i].h - b.ito)
            }),
            ("g_b-strat", |l, i| {
                let b = l.b.as_ref().unwrap();
                sq(b.entries[i].g - b.strat)
            }),
        ]);
    }
    c
}

fn brownian_path(cfg: &ExperimentConfig, index: u64) -> Result<SamplePath> {
    sample_brownian(cfg.time_grid()?, cfg.field.dim(), &RngSpec::new(cfg.seed), index)
}

/// Build ledgers for every path (common random numbers for both bases) and
/// aggregate the estimator catalog. Paths run in parallel; the reduction is
/// sequential in path order, so results do not depend on the thread count.
pub fn run_convergence_detailed(cfg: &ExperimentConfig) -> Result<ConvergenceRun> {
    cfg.validate()?;
    let grid = cfg.time_grid()?;
    let field = cfg.field.build();
    let prep_a = cfg.sequence_a()?.prepare(&grid, &cfg.schedule)?;
    let prep_b = cfg.sequence_b()?.map(|s| s.prepare(&grid, &cfg.schedule)).transpose()?;
    let ledgers: Vec<PathLedgers> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = brownian_path(cfg, i)?;
            Ok(PathLedgers {
                a: build_ledger(field.as_ref(), &path, &prep_a, i)?,
                b: prep_b
                    .as_ref()
                    .map(|p| build_ledger(field.as_ref(), &path, p, i))
                    .transpose()?,
            })
        })
        .collect::<Result<_>>()?;
    let mut report = ConvergenceReport::default();
    let mut samples = vec![0.0; ledgers.len()];
    for (name, stat) in catalog(prep_b.is_some()) {
        for (i, &n) in cfg.schedule.iter().enumerate() {
            for (s, l) in samples.iter_mut().zip(&ledgers) {
                *s = stat(l, i);
            }
            let (value, stderr) = mean_and_stderr(&samples);
            report.rows.push(ReportRow {
                estimator: name.to_string(),
                n,
                value,
                stderr,
                m: ledgers.len(),
            });
        }
    }
    Ok(ConvergenceRun { report, ledgers })
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    Ok(run_convergence_detailed(cfg)?.report)
}

/// Renormalization terms on the first path of the ensemble, for each configured basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RTrajectory {
    /// `(prefix length, r_a, r_b)`.
    pub rows: Vec<(usize, f64, Option<f64>)>,
}

impl RTrajectory {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let with_b = self.rows.first().is_some_and(|r| r.2.is_some());
        if with_b {
            w.write_record(["prefix", "r_a", "r_b"])?;
        } else {
            w.write_record(["prefix", "r_a"])?;
        }
        for (n, a, b) in &self.rows {
            let mut rec = vec![n.to_string(), fmt_f64(*a)];
            rec.extend(b.map(fmt_f64));
            w.write_record(rec)?;
        }
        w.flush().map_err(|e| Error::io("<trajectory csv>", e))?;
        Ok(())
    }

    pub fn max_a(&self) -> f64 {
        self.rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_b(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.2)
            .try_fold(f64::NEG_INFINITY, |m, b| b.map(|b| m.max(b)))
    }
}

fn trajectory_of(
    seq: &ProjectorSequence,
    field: &dyn VectorField,
    path: &SamplePath,
    cfg: &ExperimentConfig,
    prefixes: &[usize],
) -> Result<Vec<f64>> {
    match seq {
        ProjectorSequence::Prefix(family) => {
            let r = renormalization_trajectory(field, path, family, *prefixes.last().unwrap())?;
            Ok(prefixes.iter().map(|&n| r[n - 1]).collect())
        }
        ProjectorSequence::PiecewiseLinearLevels { .. } => {
            let prepared = seq.prepare(path.grid(), &cfg.schedule)?;
            let ledger = build_ledger(field, path, &prepared, 0)?;
            Ok(ledger.entries.iter().map(|e| e.r).collect())
        }
    }
}

/// `r` at every prefix length `1..=max(schedule)`, or at the schedule levels
/// when a piecewise-linear level sequence is involved.
pub fn renormalization_trajectories(cfg: &ExperimentConfig) -> Result<RTrajectory> {
    cfg.validate()?;
    let field = cfg.field.build();
    let path = brownian_path(cfg, 0)?;
    let seq_a = cfg.sequence_a()?;
    let seq_b = cfg.sequence_b()?;
    let levels = |s: &ProjectorSequence| matches!(s, ProjectorSequence::PiecewiseLinearLevels { .. });
    let prefixes: Vec<usize> = if levels(&seq_a) || seq_b.as_ref().is_some_and(levels) {
        cfg.schedule.clone()
    } else {
        (1..=*cfg.schedule.last().unwrap()).collect()
    };
    let ra = trajectory_of(&seq_a, field.as_ref(), &path, cfg, &prefixes)?;
    let rb = seq_b
        .map(|s| trajectory_of(&s, field.as_ref(), &path, cfg, &prefixes))
        .transpose()?;
    Ok(RTrajectory {
        rows: prefixes
            .iter()
            .enumerate()
            .map(|(i, &n)| (n, ra[i], rb.as_ref().map(|r| r[i])))
            .collect(),
    })
}

/// Same basis under two enumeration orders: convergence report plus `r` trajectories.
/// Without `basis.b`, basis a is reused with `order.b`.
pub fn run_order_dependence(cfg: &ExperimentConfig) -> Result<(ConvergenceReport, RTrajectory)> {
    let mut cfg = cfg.clone();
    if cfg.basis_b.is_none() {
        cfg.basis_b = Some(cfg.basis_a.clone());
    }
    let report = run_convergence(&cfg)?;
    Ok((report, renormalization_trajectories(&cfg)?))
}

/// Ensemble statistics of `Strat − Itô − ½∫∇·α(ω(t))dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionSummary {
    pub mean: f64,
    pub stderr: f64,
    pub mean_abs: f64,
    pub paths: usize,
}

pub fn run_conversion(cfg: &ExperimentConfig) -> Result<ConversionSummary> {
    let grid = cfg.time_grid()?;
    if cfg.paths == 0 {
        return Err(Error::config("`paths` must be >= 1"));
    }
    let field = cfg.field.build();
    let rng = RngSpec::new(cfg.seed);
    let residuals: Vec<f64> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = sample_brownian(grid, field.dim(), &rng, i)?;
            let f = field.as_ref();
            Ok(stratonovich_integral(f, &path)? - ito_integral(f, &path)? - half_divergence_integral(f, &path)?)
        })
        .collect::<Result<_>>()?;
    let (mean, stderr) = mean_and_stderr(&residuals);
    let mean_abs = residuals.iter().map(|r| r.abs()).sum::<f64>() / residuals.len() as f64;
    Ok(ConversionSummary {
        mean,
        stderr,
        mean_abs,
        paths: residuals.len(),
    })
}

#[derive(Debug, Clone)]
pub struct RamerCase {
    pub name: &'static str,
    pub dim: usize,
    pub equality_expected: bool,
    pub estimate: RamerEstimate,
}

/// Zero map, identity, constant and a bounded sinusoidal perturbation of the
/// identity in dimensions 1–3, all on the same Gaussian sample.
pub fn ramer_battery(samples: usize, seed: u64, rhs: RamerRhs) -> Vec<RamerCase> {
    let rng = RngSpec::new(seed);
    let constant = [1.5, -0.7, 0.4];
    let mut cases = Vec::new();
    for dim in 1..=3 {
        let fields: [(&'static str, Box<dyn VectorField>, bool); 4] = [
            ("zero", Box::new(ConstantField { value: vec![0.0; dim] }), false),
            ("identity", Box::new(MatrixField::identity(dim)), dim == 1),
            (
                "constant",
                Box::new(ConstantField {
                    value: constant[..dim].to_vec(),
                }),
                dim == 1,
            ),
            ("sine", Box::new(SineField { dim, amplitude: 0.8 }), false),
        ];
        for (name, f, equality_expected) in fields {
            cases.push(RamerCase {
                name,
                dim,
                equality_expected,
                estimate: gaussian_ramer_check(f.as_ref(), samples, &rng, rhs),
            });
        }
    }
    cases
}

pub fn write_ramer_csv<W: Write>(cases: &[RamerCase], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "case",
        "n",
        "lhs",
        "lhs_se",
        "rhs",
        "rhs_se",
        "diff_se",
        "holds",
        "equality_expected",
        "equality",
    ])?;
    for c in cases {
        let e = &c.estimate;
        w.write_record([
            c.name.to_string(),
            c.dim.to_string(),
            fmt_f64(e.lhs),
            fmt_f64(e.lhs_se),
            fmt_f64(e.rhs),
            fmt_f64(e.rhs_se),
            fmt_f64(e.diff_se),
            e.holds().to_string(),
            c.equality_expected.to_string(),
            e.is_equality().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<ramer csv>", e))?;
    Ok(())
}
