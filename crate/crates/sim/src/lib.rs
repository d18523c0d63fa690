//! Parameter sweeps, presets and table output for `kerr-core`.
//!
//! An [`config::ExperimentConfig`] names a grid over (2Δ/α, α₃, γ, f/f_crit, N)
//! and what to compute there; [`run::run_experiment`] evaluates the points on
//! a worker pool and writes one table per tier plus a summary, the tier
//! comparison and a manifest with content hashes.

use std::path::PathBuf;

pub mod compare;
pub mod config;
pub mod manifest;
pub mod plot;
pub mod presets;
pub mod run;
pub mod table;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("malformed table: {0}")]
    Table(String),
    #[error("cannot compare: {0}")]
    Compare(String),
    #[error(transparent)]
    Core(#[from] kerr_core::error::Error),
}

/// Worker count: explicit value, else `KERR_WORKERS`, else the number of CPUs.
pub fn default_workers(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var("KERR_WORKERS").ok().and_then(|v| v.parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
