//! Error type of the excitation layer.

use thiserror::Error;

/// Errors raised while synthesizing or calibrating ground motions.
#[derive(Debug, Error)]
pub enum ExciteError {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The amplitude calibration could not place the target record inside
    /// the ensemble confidence band at any intensity on the search grid.
    #[error(
        "calibration failed: best fraction within band {best_fraction:.3} at G0 = {best_g0:.4e} (required {required:.2})"
    )]
    CalibrationFailure { best_fraction: f64, best_g0: f64, required: f64 },

    /// Errors from the structural core (time-series plumbing).
    #[error(transparent)]
    Core(#[from] hystereo_core::CoreError),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, ExciteError>;

/// Shorthand constructor for precondition violations.
pub fn invalid(msg: impl Into<String>) -> ExciteError {
    ExciteError::InvalidArgument(msg.into())
}

impl ExciteError {
    /// Shorthand for [`ExciteError::InvalidArgument`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        ExciteError::InvalidArgument(msg.into())
    }
}
