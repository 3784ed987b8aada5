//! Error type of the observer layer.

use thiserror::Error;

/// Errors raised while building or analyzing observers.
#[derive(Debug, Error)]
pub enum ObserverError {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A frequency-response matrix could not be factored.
    #[error("singular dynamic stiffness at omega = {omega} rad/s")]
    Singular { omega: f64 },

    /// The gain search could not produce a usable point.
    #[error("gain optimization failed: {0}")]
    OptimizationFailure(String),

    /// Errors from the structural core (integration, assembly, I/O).
    #[error(transparent)]
    Core(#[from] hystereo_core::CoreError),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, ObserverError>;

/// Shorthand constructor for precondition violations.
pub fn invalid(msg: impl Into<String>) -> ObserverError {
    ObserverError::InvalidArgument(msg.into())
}
