//! Error type shared by the structural mechanics layer.

use thiserror::Error;

/// Errors raised while building models or integrating their response.
#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A model definition is internally inconsistent (bad connectivity,
    /// non-positive masses, singular stiffness, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// The implicit integrator failed to converge even after step halving.
    #[error("time step failed at t = {time:.6} s (step {step}): residual {residual:.3e} after {iterations} iterations")]
    StepFailure {
        time: f64,
        step: usize,
        residual: f64,
        iterations: usize,
    },

    /// A linear solve failed (singular or badly conditioned matrix).
    #[error("linear solve failed: {0}")]
    SingularMatrix(String),

    /// I/O or serialization problems while reading/writing model or response files.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed model or response file contents.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    /// Shorthand for [`CoreError::InvalidArgument`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        CoreError::InvalidArgument(msg.into())
    }

    /// Shorthand for [`CoreError::InvalidModel`].
    pub fn model(msg: impl Into<String>) -> Self {
        CoreError::InvalidModel(msg.into())
    }
}

/// Checks that a value is finite, returning `InvalidArgument` otherwise.
pub fn ensure_finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CoreError::invalid(format!("{what} must be finite, got {value}")))
    }
}
