use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("not a knot complex: {0}")]
    NotKnotComplex(String),
    #[error("algebra variant mismatch: {0}")]
    Variant(String),
    #[error("box tensor did not terminate")]
    BoxDidNotTerminate,
    #[error("extension search budget exhausted")]
    ExtensionBudget,
    #[error("curve has nontrivial local system")]
    LocalSystem,
    #[error("not idempotent up to homotopy")]
    NotIdempotent,
    #[error("basis could not be simplified: {0}")]
    NotSimplifiable(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }
}
