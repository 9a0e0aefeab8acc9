//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The input is formally valid but sits on a degenerate boundary of the
    /// model (e.g. τ = 1 makes the Rician factor infinite).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An iterative solver failed in a way that has no useful best iterate.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// Bisection found the problem feasible at the configured upper bound;
    /// the caller should retry with a larger `bisection_hi`.
    #[error("SDR bisection upper bound {bound} is too low (still feasible)")]
    UpperBoundTooLow { bound: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
