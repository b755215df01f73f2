//! Scenario runner for the covlin master-equation library: configuration
//! parsing, simulation and verification execution, CSV observable series,
//! and bit-exact density-matrix snapshots.

pub mod config;
pub mod error;
pub mod scenarios;
pub mod snapshot;

pub use config::Config;
pub use error::{CliError, Result};
