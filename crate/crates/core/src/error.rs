use thiserror::Error;

/// Errors raised by the numerical kernels and scenario pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix must have at least one row and one column")]
    Empty,

    #[error("matrix is not Hermitian: max |h - h^dagger| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error(
        "expected a one-dimensional null space; two smallest singular values are {smallest:e} and {second:e} (largest {largest:e})"
    )]
    RankDeficiency { smallest: f64, second: f64, largest: f64 },

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("subsystem dimension must be at least 2, got {0}")]
    InvalidSubsystemDim(usize),

    #[error("state amplitudes are not normalized: norm^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceViolation { trace: f64 },

    #[error("state is not positive: smallest eigenvalue {min_eigenvalue:e} below {tolerance:e}")]
    Positivity { min_eigenvalue: f64, tolerance: f64 },

    #[error("Fock truncation leakage {leakage:e} exceeds {tolerance:e}")]
    TruncationLeakage { leakage: f64, tolerance: f64 },

    #[error("state is not of X form: off-X entry of magnitude {magnitude:e}")]
    NotXState { magnitude: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty keep list for partial trace")]
    EmptyKeep,
}

pub type Result<T> = std::result::Result<T, Error>;
