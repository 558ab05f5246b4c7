//! Std companion to `fbcap-core`: PSD spec files, run reports in text, JSON
//! and CSV, a rayon-parallel Monte Carlo driver and the `fbcap` command line.

pub mod cli;
pub mod commands;
mod error;
pub mod parallel;
pub mod psd_file;
pub mod report;

pub use error::CliError;
pub use report::{InputEcho, Outcome, RunReport, Table};
