use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config validation failed [{constraint}]: {detail}")]
    Validation { constraint: &'static str, detail: String },
    #[error("field file header error: {0}")]
    Header(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl GridError {
    pub(crate) fn validation(constraint: &'static str, detail: impl Into<String>) -> Self {
        GridError::Validation { constraint, detail: detail.into() }
    }
}
