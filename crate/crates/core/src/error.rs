//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by any module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested operation is not defined for this process/subordinator family.
    #[error("unsupported family for {op}: {family}")]
    UnsupportedFamily { family: String, op: &'static str },

    /// A series failed to satisfy its stopping rule.
    #[error("series did not converge after {terms} terms (last term {last_term:e})")]
    NonConvergence { terms: usize, last_term: f64 },

    /// Intermediate values left the floating-point range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A numerical-differentiation error estimate exceeded its tolerance.
    #[error("precision loss: estimate {estimate:e} has error estimate {error_estimate:e}")]
    PrecisionLoss { estimate: f64, error_estimate: f64 },

    /// A table window does not cover the locations an operator needs.
    #[error("insufficient support: {0}")]
    Support(String),

    /// A combinatorial oracle was asked to run beyond its stated bounds.
    #[error("size limit exceeded: {0}")]
    Size(String),

    /// A comparison table leaves too much mass outside its window.
    #[error("coverage error: table tail bound {tail:e} exceeds 1e-3")]
    Coverage { tail: f64 },

    /// Command line or config parsing failed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
