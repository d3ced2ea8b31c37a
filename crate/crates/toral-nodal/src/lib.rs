//! Command-line driver for the `toral-nodal-core` experiments: configuration,
//! parallel sweeps, JSONL/CSV/SVG output and eigenfunction export.

pub mod config;
pub mod error;
pub mod export;
pub mod output;
pub mod records;
pub mod run;

pub use config::{Command, ExperimentConfig, SCHEMA};
pub use error::{CliError, Result};
