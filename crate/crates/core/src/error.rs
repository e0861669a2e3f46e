use thiserror::Error;

/// Errors produced by the estimation pipeline and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is out of its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two objects that must agree in shape do not.
    #[error("shape mismatch: {what} (expected {expected}, found {found})")]
    ShapeMismatch { what: &'static str, expected: String, found: String },

    #[error("underdetermined fit: {points} grid points for {nbasis} basis functions")]
    UnderdeterminedFit { points: usize, nbasis: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("NMSE undefined: the original series has zero norm")]
    UndefinedDenominator,

    /// Malformed CSV input. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed model document: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(what: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::ShapeMismatch { what, expected: expected.to_string(), found: found.to_string() }
    }
}
