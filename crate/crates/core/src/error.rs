use thiserror::Error;

/// Errors raised by the library. Variants map onto the CLI exit codes:
/// shape and parse problems are usage errors, probability problems are
/// data-validity errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (only 2 and 4 are supported)")]
    UnsupportedDimension(usize),

    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("matrix is not hermitian (max |M - M†| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (max |U†U - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("vectors do not form an orthonormal basis (residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("invalid spectral family: {0}")]
    InvalidSpectralFamily(String),

    #[error("invalid density operator: {0}")]
    InvalidDensityOperator(String),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
