use thiserror::Error;

/// Errors raised by the laboratory's operations.
///
/// Regime violations of the closed-form bounds are *not* errors; they are
/// reported through [`crate::bounds::BoundValue::valid`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty request: {0}")]
    EmptyRequest(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    Dimension {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("degenerate centroids: cluster {0} is empty and has no defined mean")]
    Degenerate(usize),

    #[error("bound regime violated: {0}")]
    Regime(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
