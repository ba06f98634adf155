use thiserror::Error;

/// Errors produced by the factorization, execution and conversion routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TsvdError {
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error(
        "no ternary vector of length {len} lies within the angle threshold \
         (best cosine {best_cos:.6} < {cos_theta:.6})"
    )]
    NoTernaryWithinTheta {
        len: usize,
        best_cos: f64,
        cos_theta: f64,
    },

    #[error("ternary value {0} is not one of -1, 0, +1")]
    InvalidTrit(i8),

    #[error("forbidden 2-bit code 0b11 at element {index}")]
    ForbiddenCode { index: usize },

    #[error("non-zero padding bits in row {row}")]
    NonZeroPadding { row: usize },

    #[error("payload length {found} does not match the expected {expected} bytes")]
    PayloadLength { expected: usize, found: usize },

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("cannot ternarize the zero vector")]
    ZeroVector,

    #[error("reference matrix has zero norm")]
    ZeroNorm,

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("unsupported convolution geometry: {0}")]
    UnsupportedGeometry(&'static str),
}

pub type Result<T> = core::result::Result<T, TsvdError>;
