//! Command-line front end for the simulator: flag and config-file
//! parsing, sweep execution, and deterministic CSV output.
//!
//! The binary is a thin wrapper around [`config::parse_args`],
//! [`irs_cf_core::run_sweep`], and [`output::write_csv_file`]; the
//! pieces live here so tests can drive them in-process.

pub mod config;
pub mod output;

pub use config::{parse_args, CliError, OutputFormat, RunConfig, SweepAxis, DEFAULT_SEED};
pub use output::{format_sig12, write_csv, write_csv_file};
