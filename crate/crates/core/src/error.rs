use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the realization library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The model's Toeplitz operator is numerically rank-deficient.
    #[error("degenerate model: {0}")]
    Degenerate(String),

    /// The eigensolver found affine eigenvalues, but none of them real.
    #[error("no real affine eigenvalue among {} candidates", eigenvalues.len())]
    NoRealSolution { eigenvalues: Vec<Vec<Complex64>> },

    /// Block Macaulay iteration hit the degree cap before the nullity
    /// stabilized and a gap zone appeared.
    #[error("block Macaulay did not stabilize by degree {max_degree} (nullities: {nullities:?})")]
    MacaulayNoConvergence {
        max_degree: usize,
        nullities: Vec<usize>,
    },

    #[error("linear algebra backend: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
