use thiserror::Error;

/// Errors raised when constructing or combining channel objects.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{0}: dimension must be positive")]
    ZeroDimension(&'static str),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("not Hermitian (max |M - M^*| = {0:e})")]
    NotHermitian(f64),

    #[error("not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("Kraus family is not trace preserving (||sum A^*A - I|| = {0:e})")]
    NotTracePreserving(f64),

    #[error("not an isometry (||V^*V - I|| = {0:e})")]
    NotIsometry(f64),

    #[error("not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("not a partial isometry (||(W^*W)^2 - W^*W|| = {0:e})")]
    NotPartialIsometry(f64),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("invalid rank {rank} (limit {limit})")]
    InvalidRank { rank: usize, limit: usize },

    #[error("numerical rank of initial projector ({initial}) differs from final projector ({final_rank})")]
    RankMismatch { initial: usize, final_rank: usize },

    #[error("initial projector of term {index} deviates from the shared projector by {deviation:e}")]
    InconsistentProjectors { index: usize, deviation: f64 },

    #[error("environment of dimension {required} cannot be embedded into {available}")]
    NonEmbeddable { required: usize, available: usize },

    #[error("sequence has no term with index {0}")]
    IndexOutOfRange(usize),

    #[error("not symmetric (max |M - M^T| = {0:e})")]
    NotSymmetric(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
