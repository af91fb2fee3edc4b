use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tensor order {0} is not supported (expected 1..=4)")]
    UnsupportedOrder(usize),

    #[error("order mismatch: partition of {partition} against permutation of {permutation}")]
    OrderMismatch { partition: usize, permutation: usize },

    #[error("dense operator of side {side} exceeds the {limit} entry limit")]
    Capacity { side: usize, limit: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {d} is outside the domain of {what}")]
    Domain { d: usize, what: String },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("evaluator failed at sample {index}: {message}")]
    Evaluation { index: u64, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
