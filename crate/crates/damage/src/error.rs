//! Error type shared by the assessment routines.

use thiserror::Error;

/// Anything that can go wrong while post-processing a response history.
#[derive(Debug, Error)]
pub enum DamageError {
    /// Inconsistent or out-of-range arguments.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Bubbled up from the structural core.
    #[error(transparent)]
    Core(#[from] hystereo_core::error::CoreError),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, DamageError>;

/// Shorthand for the invalid-argument case.
pub fn invalid(msg: impl Into<String>) -> DamageError {
    DamageError::InvalidArgument(msg.into())
}
