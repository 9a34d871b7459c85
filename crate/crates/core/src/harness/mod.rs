//! Config-driven Monte Carlo experiments and their CSV/TOML artifacts.

mod config;
mod expectations;
mod experiment;
mod report;

pub use config::{ExperimentConfig, KEYS};
pub use expectations::{Expectations, ExpectedExperiment, Mismatch, EXPECTATIONS_VERSION};
pub use experiment::{
    ramer_battery, renormalization_trajectories, run_convergence, run_convergence_detailed, run_conversion,
    run_order_dependence, write_ramer_csv, ConvergenceRun, ConversionSummary, PathLedgers, RTrajectory, RamerCase,
};
pub use report::{emit_report, parse_report, ConvergenceReport, ReportRow};
