//! Crate-wide error type.
//!
//! Numerical failure is a first-class outcome here: an adaptive integral that
//! exhausts its budget is reported as [`Error::NonConverged`] with the best
//! estimate attached, never silently returned as if it were good.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation
    /// (non-positive distance, negative width, and so on).
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrator stopped before reaching the requested tolerance.
    /// `value` and `error` carry the best estimate it had.
    #[error("quadrature did not converge: {context} (estimate {value:e}, error {error:e}, {evaluations} evaluations)")]
    NonConverged {
        context: String,
        value: f64,
        error: f64,
        evaluations: u64,
    },

    /// Extrapolation input was rejected (too few samples, abscissae not
    /// strictly decreasing, non-finite values) or the tableau went unstable.
    #[error("extrapolation error: {0}")]
    Extrapolation(String),

    /// A source configuration whose density integrals diverge at large k.
    #[error("inadmissible source: {0}")]
    Inadmissible(String),

    /// Malformed run configuration (CLI flags or config file).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
