use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scalar modes differ")]
    ModeMismatch,
    #[error("polynomials are over different variable lists")]
    VariableMismatch,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is singular")]
    Singular,
    #[error("pole: 1 - dS~ is singular (det = {det_modulus:e})")]
    Pole { det_modulus: f64 },
    #[error("determinant of size {size} exceeds the configured cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("index out of range: {0}")]
    Index(String),
    #[error("invalid shape: {0}")]
    Shape(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("linear system has no unique solution")]
    NotUnique,
    #[error("ill-conditioned Taylor extraction (residual {residual:e})")]
    Conditioning { residual: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
