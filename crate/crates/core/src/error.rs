use thiserror::Error;

/// Errors raised by the library. Verdict-style outcomes (a network is not
/// minimal, a relation is not decomposable) are never errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("scope mismatch: {0}")]
    ScopeMismatch(String),
    #[error("invalid scope: {0}")]
    InvalidScope(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("constraint of arity {arity} exceeds k = {k}")]
    Arity { arity: usize, k: usize },
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("query error: {0}")]
    Query(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
