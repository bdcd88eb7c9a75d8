//! Error type shared by every module.

use thiserror::Error;

/// Failure modes of the channel models and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series, quadrature or root search did not reach its tolerance.
    #[error("convergence error in {what}: achieved bound {bound:e}")]
    Convergence { what: String, bound: f64 },

    /// A requested model combination is not implemented.
    #[error("unsupported model: {0}")]
    Unsupported(String),

    /// A numeric routine failed outright (for example a singular system).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A particle left the accessible domain without being handled by any surface.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A least-squares fit stopped before convergence. `best` holds the
    /// best-so-far parameter vector in the fitter's documented order.
    #[error("fit did not converge after {iterations} iterations (best residual {residual:e})")]
    Fit { iterations: usize, residual: f64, best: Vec<f64> },

    /// Realization series do not share a common time grid.
    #[error("alignment error: {0}")]
    Alignment(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Returns a [`Error::Domain`] built from a format string.
macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(format!($($arg)*))
    };
}
pub(crate) use domain;

/// Rejects non-finite or non-positive values.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(domain!("{name} must be finite and > 0, got {value}"))
    }
}

/// Rejects non-finite or negative values.
pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(domain!("{name} must be finite and >= 0, got {value}"))
    }
}
