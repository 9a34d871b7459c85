use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use ogawa_core::field::RamerRhs;
use ogawa_core::harness::{
    emit_report, ramer_battery, renormalization_trajectories, run_convergence_detailed, run_order_dependence,
    write_ramer_csv, ConvergenceReport, Expectations, ExperimentConfig,
};
use ogawa_core::ogawa::write_ledger_csv;
use ogawa_core::spectral::discretized_l_spectrum;
use ogawa_core::{sample_brownian, Error, FieldSpec, RngSpec};

const EXIT_CONFIG: u8 = 2;
const EXIT_ASSERT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ogawa",
    version,
    about = "Monte Carlo and spectral experiments for noncausal stochastic integrals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence of the truncated sums for one or two bases.
    Converge {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        check: Check,
        /// Write per-path ledgers (path_index,n,g,r,h,gprime,ito,strat).
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Write the first sampled path as CSV.
        #[arg(long)]
        path_dump: Option<PathBuf>,
    },
    /// Order dependence of the renormalization term: basis a under order.a and order.b.
    Order {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        check: Check,
        /// Write the r trajectory (prefix,r_a,r_b).
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Closed-form versus discretized spectrum of L for a linear field.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
    /// Renormalization trajectories r(prefix) on the first path.
    Trace {
        #[command(flatten)]
        common: Common,
    },
    /// Gaussian inequality battery.
    Ramer {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Square the right-hand side.
        #[arg(long)]
        squared: bool,
        /// Exit with status 3 unless every case holds.
        #[arg(long = "assert")]
        assert: bool,
    },
    /// Run a convergence experiment and record it in the expectations file.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "expectations.toml")]
        expectations: PathBuf,
    },
}

/// Config file plus flag overrides (flags win).
#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    field: Option<String>,
    #[arg(long = "basis-a", alias = "basis")]
    basis_a: Option<String>,
    #[arg(long = "basis-b")]
    basis_b: Option<String>,
    #[arg(long = "order-a", alias = "order")]
    order_a: Option<String>,
    #[arg(long = "order-b")]
    order_b: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    paths: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Any config key, as KEY=VALUE.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct Check {
    /// Compare against the expectations file; exit with status 3 on mismatch.
    #[arg(long = "assert")]
    assert: bool,
    #[arg(long, default_value = "expectations.toml")]
    expectations: PathBuf,
}

impl Common {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).map_err(as_config)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("field", &self.field),
            ("basis.a", &self.basis_a),
            ("basis.b", &self.basis_b),
            ("order.a", &self.order_a),
            ("order.b", &self.order_b),
            ("grid", &self.grid),
            ("paths", &self.paths),
            ("seed", &self.seed),
            ("schedule", &self.schedule),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }
}

/// Unreadable inputs named on the command line count as configuration errors.
fn as_config(e: Error) -> Error {
    match e {
        Error::Io { path, source } => Error::Config(format!("cannot read {}: {source}", path.display())),
        other => other,
    }
}

#[derive(Debug)]
struct AssertionFailed(String);

impl std::fmt::Display for AssertionFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "assertion failed: {}", self.0)
    }
}

impl std::error::Error for AssertionFailed {}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Write to `out` if configured, else stdout.
fn output(cfg: &ExperimentConfig) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_report(cfg: &ExperimentConfig, report: &ConvergenceReport) -> anyhow::Result<()> {
    match &cfg.out {
        Some(p) => emit_report(report, p)?,
        None => report.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn check_expectations(check: &Check, cfg: &ExperimentConfig, report: &ConvergenceReport) -> anyhow::Result<()> {
    if !check.assert {
        return Ok(());
    }
    let exp = Expectations::load(&check.expectations).map_err(as_config)?;
    let Some(entry) = exp.for_config(cfg) else {
        bail!(AssertionFailed(format!(
            "no entry in {} for this configuration",
            check.expectations.display()
        )));
    };
    let bad = entry.compare(report);
    if !bad.is_empty() {
        let lines: Vec<String> = bad.iter().map(|m| m.to_string()).collect();
        bail!(AssertionFailed(format!("`{}`:\n  {}", entry.name, lines.join("\n  "))));
    }
    eprintln!(
        "expectations `{}`: {} rows within 3-SE bands",
        entry.name,
        entry.rows.len()
    );
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Converge {
            common,
            check,
            ledger,
            path_dump,
        } => {
            let cfg = common.resolve()?;
            let run = run_convergence_detailed(&cfg)?;
            write_report(&cfg, &run.report)?;
            if let Some(p) = ledger {
                let mut all: Vec<_> = run.ledgers.iter().map(|l| l.a.clone()).collect();
                all.extend(run.ledgers.iter().filter_map(|l| l.b.clone()));
                write_ledger_csv(&all, create(&p)?)?;
            }
            if let Some(p) = path_dump {
                let path = sample_brownian(cfg.time_grid()?, cfg.field.dim(), &RngSpec::new(cfg.seed), 0)?;
                path.write_csv(create(&p)?)?;
            }
            check_expectations(&check, &cfg, &run.report)
        }
        Command::Order {
            common,
            check,
            trajectory,
        } => {
            let cfg = common.resolve()?;
            let (report, traj) = run_order_dependence(&cfg)?;
            write_report(&cfg, &report)?;
            if let Some(p) = trajectory {
                traj.write_csv(create(&p)?)?;
            }
            check_expectations(&check, &cfg, &report)
        }
        Command::Spectrum { common, count } => {
            let cfg = common.resolve()?;
            let FieldSpec::Linear(field) = cfg.field else {
                return Err(Error::Config(format!("spectrum needs a linear field, got `{}`", cfg.field)).into());
            };
            let rep = discretized_l_spectrum(&field, &cfg.time_grid()?, count)?;
            let mut out = output(&cfg)?;
            writeln!(out, "n,j,lambda_closed,lambda_numeric,rel_err")?;
            for (n, j, closed, numeric, rel) in rep.rows() {
                let (numeric, rel) = (numeric.unwrap(), rel.unwrap());
                writeln!(out, "{n},{j},{closed:.16e},{numeric:.16e},{rel:.6e}")?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Trace { common } => {
            let cfg = common.resolve()?;
            let traj = renormalization_trajectories(&cfg)?;
            traj.write_csv(output(&cfg)?)?;
            Ok(())
        }
        Command::Ramer {
            common,
            samples,
            squared,
            assert,
        } => {
            let cfg = common.resolve()?;
            if samples < 2 {
                return Err(Error::Config("--samples must be >= 2".into()).into());
            }
            let rhs = if squared { RamerRhs::Squared } else { RamerRhs::Plain };
            let cases = ramer_battery(samples, cfg.seed, rhs);
            write_ramer_csv(&cases, output(&cfg)?)?;
            let bad: Vec<String> = cases
                .iter()
                .filter(|c| !c.estimate.holds() || (c.equality_expected && !c.estimate.is_equality()))
                .map(|c| format!("{} n={}", c.name, c.dim))
                .collect();
            if assert && !bad.is_empty() {
                bail!(AssertionFailed(bad.join(", ")));
            }
            Ok(())
        }
        Command::Oracle {
            common,
            name,
            expectations,
        } => {
            let cfg = common.resolve()?;
            let report = run_convergence_detailed(&cfg)?.report;
            let mut exp = Expectations::load_or_default(&expectations)?;
            exp.record(&name, &cfg, &report);
            exp.save(&expectations)?;
            eprintln!(
                "recorded `{name}` ({} rows) in {}",
                report.rows.len(),
                expectations.display()
            );
            write_report(&cfg, &report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<AssertionFailed>().is_some() {
                ExitCode::from(EXIT_ASSERT)
            } else if e.downcast_ref::<Error>().is_some_and(Error::is_config) {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
