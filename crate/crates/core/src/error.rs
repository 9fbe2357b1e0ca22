use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("partial trace needs a nonempty set of kept factors")]
    EmptyKeepSet,

    #[error("factor index {index} out of range for {factors} factors")]
    FactorOutOfRange { index: usize, factors: usize },

    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not an orthogonal projection (residual {0:e})")]
    NotProjection(f64),

    #[error("vector is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("coefficient matrix is identically zero")]
    ZeroCoefficients,

    #[error("coefficient matrix is not diagonal")]
    NotDiagonal,

    #[error("measurement outcome '{0}' has zero probability for this input")]
    ZeroProbability(String),

    #[error("tripartite dimension {0} exceeds the explicit-path limit")]
    ExplicitPathTooLarge(usize),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
