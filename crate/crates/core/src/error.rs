use thiserror::Error;

/// Failures of the dense Hermitian kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e}, tolerance {tolerance:e})")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e}, tolerance {tolerance:e})")]
    NotPositiveDefinite { min_eigenvalue: f64, tolerance: f64 },
    #[error("invalid spectral window: m = {m}, M = {big_m}")]
    InvalidWindow { m: f64, big_m: f64 },
    #[error("dimension {0} is outside the supported range 1..=64")]
    UnsupportedDimension(usize),
    #[error("empty matrix")]
    Empty,
    #[error("singular value decomposition failed: {0}")]
    Svd(String),
}
