//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input matrix deviates from symmetry beyond the admission tolerance.
    #[error("matrix is not symmetric: relative asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    /// A matrix required to be positive semi-definite has a significantly
    /// negative eigenvalue.
    #[error("matrix is not positive semi-definite: min eigenvalue {min_eigenvalue:.6e}")]
    NotPsd { min_eigenvalue: f64 },

    /// A matrix required to be orthogonal is not, within tolerance.
    #[error("matrix is not orthogonal: ||U^T U - I||_F = {deviation:.3e}")]
    NotOrthogonal { deviation: f64 },

    /// Incompatible or out-of-range dimensions.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Matrix dimension below 1.
    #[error("dimension must be at least 1")]
    InvalidDimension,

    /// A tolerance parameter outside its admissible open interval.
    #[error("tolerance {0} must lie in (0, 1)")]
    InvalidTolerance(f64),

    /// Shape parameter is NaN or infinite.
    #[error("expected a finite value, got {0}")]
    NonFinite(f64),

    /// The excluded trivial cases: shape p <= 0 or a zero scale matrix.
    #[error("trivial parameters rejected: {0}")]
    TrivialParameter(String),

    /// The pair (p, sigma) admits no Wishart distribution: p is outside
    /// the Gindikin set of the scale's rank.
    #[error("no Wishart distribution exists: shape {shape} is outside the Gindikin set for rank {rank}")]
    NonExistent { shape: f64, rank: usize },

    /// Gaussian-sum sampling requires 2p to be a positive integer.
    #[error("shape {0}: 2p is not a positive integer")]
    ShapeNotHalfInteger(f64),

    /// Triangular-factor sampling requires p strictly above (rank-1)/2.
    #[error("shape {shape} is not above the triangular-factor bound (rank-1)/2 = {bound}")]
    ShapeTooSmall { shape: f64, bound: f64 },

    /// Operation defined only for rank-1 scale matrices.
    #[error("scale rank is {0}, expected exactly 1")]
    RankNotOne(usize),

    /// Empirical estimate requested over an empty batch.
    #[error("sample batch is empty")]
    EmptyBatch,
}
