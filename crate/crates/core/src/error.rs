use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid norm exponent {0}: must satisfy p >= 1")]
    InvalidExponent(f64),

    #[error("space dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("malformed shape: {0}")]
    Shape(String),

    #[error("invalid triangular scheme: {0}")]
    InvalidScheme(String),

    #[error("complement pair does not fit the operator: {identity} (residual {residual:.3e})")]
    ComplementMismatch { identity: String, residual: f64 },

    #[error("range inclusion fails: residual {residual:.3e} exceeds {threshold:.3e}")]
    InclusionFailure { residual: f64, threshold: f64 },

    #[error("row spaces of K and the analysis map differ: residuals {forward:.3e} (K* in S*) and {backward:.3e} (S* in K*), threshold {threshold:.3e}")]
    RangeEquality {
        forward: f64,
        backward: f64,
        threshold: f64,
    },

    #[error("operator is not a projection: |P^2 - P| = {residual:.3e}")]
    NotProjection { residual: f64 },

    #[error("basis vectors are linearly dependent (rank {rank} of {count})")]
    DegenerateBasis { rank: usize, count: usize },

    #[error("subspaces are not numerically complementary: smallest principal angle {angle:.3e} rad")]
    Decomposition { angle: f64 },

    #[error("K-frame bounds need p = q = 2, got p = {p}, q = {q}")]
    NotHilbert { p: String, q: String },

    #[error("candidate is not a verified atomic system (final residual {residual:.3e})")]
    Unverified { residual: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn mismatch(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        }
    }
}
