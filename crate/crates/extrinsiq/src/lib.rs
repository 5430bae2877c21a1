//! Files, parallel drivers and the command line for `extrinsiq-core`.
//!
//! Datasets and calibration results are JSON, report tables are CSV with an
//! optional JSON mirror. Output files hold no timestamps, so a command run
//! twice with the same inputs writes the same bytes.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod io;
pub mod parallel;
pub mod report;

pub use error::{CliError, CliResult};
