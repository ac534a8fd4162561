//! Batch front-end for the nanoplate solver: configs, sweeps, convergence
//! studies and validation against embedded reference tables.

pub mod config;
pub mod error;
pub mod reference;
pub mod runner;

pub use config::{AnalysisConfig, Bc, SweepConfig};
pub use error::CliError;
