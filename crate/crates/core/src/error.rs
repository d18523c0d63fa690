use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("truncation n_max={n_max} too small; need at least {suggested}")]
    Truncation { n_max: usize, suggested: usize },
    #[error("drive is zero: stationary points form a continuum")]
    DegenerateDrive,
    #[error("phase portrait is not bistable")]
    NotBistable,
    #[error("quasienergy {eps} outside window ({lo}, {hi}) of region {region}")]
    OutsideWindow { region: u8, eps: f64, lo: f64, hi: f64 },
    #[error("quasienergy {0} too close to the separatrix")]
    NearSeparatrix(f64),
    #[error("no tunneling barrier at quasienergy {0}")]
    NoBarrier(f64),
    #[error("barrier topology: unexpected branch points {0:?}")]
    Topology(alloc::vec::Vec<f64>),
    #[error("root not bracketed on [{0}, {1}]")]
    NotBracketed(f64, f64),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("singular linear system (condition estimate {0:e})")]
    Singular(f64),
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = core::result::Result<T, Error>;
