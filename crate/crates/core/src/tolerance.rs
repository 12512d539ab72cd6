//! Numerical tolerances shared by every module.
//!
//! Validation thresholds apply when a value is constructed; arithmetic
//! identities (traces, products) are expected to hold at the tighter level.

/// Invariant checks on constructed operators and channels.
pub const VALIDATION: f64 = 1e-10;

/// Entrywise Hermiticity of density operators.
pub const HERMITIAN: f64 = 1e-12;

/// Exact algebraic identities such as trace preservation of a partial trace.
pub const ARITHMETIC: f64 = 1e-12;

/// Comparisons between spectra obtained from different decompositions.
pub const SPECTRAL: f64 = 1e-8;

/// Smallest eigenvalue tolerated in a positive semidefinite matrix.
pub const PSD_FLOOR: f64 = -1e-10;

/// Choi eigenvalues at or below this are treated as zero.
pub const CHOI_RANK_CUTOFF: f64 = 1e-10;

/// Eigenvalues of a state at or below this are dropped from a purification.
pub const PURIFY_CUTOFF: f64 = 1e-12;

/// Residual norm below which a projected reference vector is considered lost
/// and a deterministic complement vector is substituted.
pub const DEGENERATE_BRANCH: f64 = 1e-8;

/// Eigenvalues closer than this are treated as one degenerate group when
/// ordering eigenvectors.
pub const EIGEN_TIE: f64 = 1e-10;
