use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point or endpoint fell outside `[0, 1]`.
    #[error("domain error: {0}")]
    Domain(String),

    /// Constructor parameters outside the admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The requested orbit engine cannot deliver trustworthy values.
    #[error("precision refused: {0}")]
    Precision(String),

    /// An orbit landed on a partition endpoint (measure zero; resample).
    #[error("orbit hit a partition boundary at step {step}")]
    Boundary { step: usize },

    /// The operation needs exact arithmetic that this map cannot provide.
    #[error("inexact operation: {0}")]
    Inexact(String),

    /// Quadrature or root finding did not converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Exact set computation would exceed the interval-count guard.
    #[error("exact computation refused: predicted {predicted} intervals exceeds limit {limit}")]
    Blowup { predicted: u128, limit: u128 },

    /// Malformed spec string or config value.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
