//! Runner errors and their exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration, arguments or input files (exit code 2).
    #[error("validation error at {location}: {message}")]
    Validation { location: String, message: String },
    /// Numeric or convergence failure while running (exit code 3).
    #[error("numeric error at {location}: {message}")]
    Numeric { location: String, message: String },
    #[error("i/o error at {location}: {message}")]
    Io { location: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } | CliError::Io { .. } => 2,
            CliError::Numeric { .. } => 3,
        }
    }

    /// Classifies a library error raised while evaluating `location`.
    pub fn from_core(location: impl Into<String>, e: mckit::Error) -> Self {
        use mckit::Error as E;
        let location = location.into();
        let message = e.to_string();
        match e {
            E::Domain(_) | E::Unsupported(_) | E::Geometry(_) | E::Alignment(_) => {
                CliError::Validation { location, message }
            }
            E::Convergence { .. } | E::Numeric(_) | E::Fit { .. } => CliError::Numeric { location, message },
        }
    }

    pub fn io(location: impl Into<String>, e: std::io::Error) -> Self {
        CliError::Io { location: location.into(), message: e.to_string() }
    }
}
