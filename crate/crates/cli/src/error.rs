//! Workbench error type with process exit-code mapping.
//!
//! Every failure is folded into one of three camps: bad input (exit 2),
//! numerical failure (exit 3), or a pipeline stage abort (exit 4).  Library
//! errors are classified by kind so a malformed config file and a diverged
//! time step reach the shell differently.

use thiserror::Error;

/// Workbench-level error.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed configuration, model file, or command arguments.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A solver or optimizer failed to produce a result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A pipeline stage aborted; the partial manifest records the stages
    /// that completed.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        /// Pipeline stage tag.
        stage: &'static str,
        /// Underlying failure.
        #[source]
        source: Box<CliError>,
    },
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, CliError>;

/// Shorthand constructor for input problems.
pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::InvalidInput(msg.into())
}

impl CliError {
    /// Process exit code: 2 invalid input, 3 numerical failure, 4 stage
    /// failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidInput(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Stage { .. } => 4,
        }
    }

    /// Tags an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> CliError {
        CliError::Stage { stage, source: Box::new(self) }
    }
}

impl From<hystereo_core::CoreError> for CliError {
    fn from(e: hystereo_core::CoreError) -> Self {
        use hystereo_core::CoreError as E;
        match e {
            E::InvalidArgument(_) | E::InvalidModel(_) | E::Parse(_) | E::Io(_) => {
                CliError::InvalidInput(e.to_string())
            }
            E::StepFailure { .. } | E::SingularMatrix(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<hystereo_excite::ExciteError> for CliError {
    fn from(e: hystereo_excite::ExciteError) -> Self {
        use hystereo_excite::ExciteError as E;
        match e {
            E::InvalidArgument(_) => CliError::InvalidInput(e.to_string()),
            E::CalibrationFailure { .. } => CliError::Numerical(e.to_string()),
            E::Core(inner) => inner.into(),
        }
    }
}

impl From<hystereo_observer::ObserverError> for CliError {
    fn from(e: hystereo_observer::ObserverError) -> Self {
        use hystereo_observer::ObserverError as E;
        match e {
            E::InvalidArgument(_) => CliError::InvalidInput(e.to_string()),
            E::Singular { .. } | E::OptimizationFailure(_) => CliError::Numerical(e.to_string()),
            E::Core(inner) => inner.into(),
        }
    }
}

impl From<hystereo_damage::DamageError> for CliError {
    fn from(e: hystereo_damage::DamageError) -> Self {
        use hystereo_damage::DamageError as E;
        match e {
            E::InvalidArgument(_) => CliError::InvalidInput(e.to_string()),
            E::Core(inner) => inner.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::InvalidInput(format!("io error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::InvalidInput(format!("json error: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(invalid("x").exit_code(), 2);
        assert_eq!(CliError::Numerical("diverged".into()).exit_code(), 3);
        assert_eq!(invalid("x").in_stage("simulate").exit_code(), 4);
    }

    #[test]
    fn library_errors_classify_by_kind() {
        let bad = hystereo_core::CoreError::invalid("nope");
        assert_eq!(CliError::from(bad).exit_code(), 2);
        let diverged = hystereo_core::CoreError::StepFailure {
            time: 1.0,
            step: 3,
            residual: 1.0,
            iterations: 40,
        };
        assert_eq!(CliError::from(diverged).exit_code(), 3);
        let stage = CliError::from(hystereo_core::CoreError::invalid("nope")).in_stage("sense");
        assert!(stage.to_string().contains("sense"));
    }
}
