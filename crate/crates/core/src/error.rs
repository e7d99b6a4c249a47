use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain (point not in the half-plane,
    /// radius out of range, disk crossing the real axis, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation left the representable floating-point range.
    #[error("numeric range error: {0}")]
    NumericRange(String),

    /// Invalid or unbounded grid request.
    #[error("grid error: {0}")]
    Grid(String),

    /// A quadrature result failed its a-posteriori accuracy check.
    #[error("quadrature accuracy: {0}")]
    Accuracy(String),

    /// Two routes that must agree disagreed; signals a calculus bug.
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    /// Malformed input document.
    #[error("parse error: {0}")]
    Parse(String),

    /// Internal invariant violated (bounded rewriting exceeded its budget).
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
