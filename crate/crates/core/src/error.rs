use thiserror::Error;

/// Errors raised by the checkers. Each variant names a violated precondition
/// or structural problem; none of them represent a failed inequality.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NaN encountered in {0}")]
    NaN(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid tolerance policy: {0}")]
    Tolerance(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("unsupported form: {0}")]
    UnsupportedForm(String),

    #[error("vector {name} lies outside the closed future cone")]
    OutsideCone { name: &'static str },

    #[error("premise fails at index {index}: {detail}")]
    Premise { index: usize, detail: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
