use thiserror::Error;

/// Errors shared across the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },
    #[error("row {row}: diagonal entry is missing")]
    MissingDiagonal { row: usize },
    #[error("row {row}: diagonal entry is zero")]
    ZeroDiagonal { row: usize },
    #[error("zero pivot at row {row}")]
    ZeroPivot { row: usize },
    #[error("matrix is singular to working precision at column {col}")]
    SingularMatrix { col: usize },
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
    #[error("matrix market: {0}")]
    MatrixMarket(String),
    #[error("schur perturbation touches non-interface velocity column {col}")]
    SchurPatternViolation { col: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(op: &'static str, detail: impl Into<String>) -> Error {
    Error::DimensionMismatch {
        op,
        detail: detail.into(),
    }
}
