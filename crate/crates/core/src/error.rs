use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |A - A^H| entry = {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("trace is not 1 (|Tr - 1| = {residual:.3e})")]
    InvalidTrace { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue = {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("basis is not orthonormal (max |G - I| entry = {residual:.3e})")]
    NotOrthonormal { residual: f64 },

    #[error("POVM effects do not sum to identity (max deviation = {residual:.3e})")]
    IncompletePovm { residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver did not converge for a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },

    #[error("dimension {dim} exceeds the configured cap of {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("record has zero likelihood under every particle")]
    DegeneratePosterior,

    #[error("malformed JSON: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
