//! Numerical lab for noncausal (Ogawa) stochastic integrals of gradient-type
//! integrands along Brownian paths.

pub mod basis;
pub mod error;
pub mod field;
pub mod harness;
pub mod ogawa;
pub mod path;
pub mod quadrature;
pub mod spectral;

pub use basis::{BasisElement, BasisFamily, BasisTable, ElementLabel, EnumerationOrder};
pub use error::{Error, Result};
pub use field::{FieldSpec, LinearField, VectorField};
pub use harness::{ConvergenceReport, ExperimentConfig};
pub use ogawa::{build_ledger, LedgerEntry, OgawaLedger, ProjectorSequence};
pub use path::{sample_brownian, RngSpec, SamplePath, TimeGrid};
pub use spectral::{QuadraticFormMatrix, SpectrumReport};
