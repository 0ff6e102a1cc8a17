//! Error type shared by every module.

use thiserror::Error;

/// Failure modes of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inconsistent or incomplete configuration (tables, lattices, grids).
    #[error("configuration error: {0}")]
    Config(String),
    /// An iterative solver did not reach its tolerance.
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e}, target {tolerance:.1e})")]
    Solver {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },
    /// A request beyond a supported practical limit.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// The time integrator produced a non-finite value.
    #[error("integration error at t = {time}: {detail}")]
    Integration { time: f64, detail: String },
    /// Reading or writing output failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// CSV serialization failed.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
