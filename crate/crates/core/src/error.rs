use thiserror::Error;

use crate::matrix::Field;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("field mismatch: expected {expected}, got {got}")]
    FieldMismatch { expected: Field, got: Field },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid blocky pattern: {0}")]
    InvalidPattern(String),

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("size cap exceeded: {0}")]
    CapExceeded(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("certificate error: {0}")]
    Certificate(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
