//! Scenario-driven front end for `qosc-core`: TOML scenario files, the
//! `derive`, `solve` and `verify` pipelines, and their CSV reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;

pub use error::{CliError, Result};
pub use scenario::Scenario;

/// Builds the global thread pool from `QOSC_THREADS`, if set.
pub fn init_threads(var: Option<&str>) -> Result<()> {
    let Some(v) = var else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("QOSC_THREADS = `{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
