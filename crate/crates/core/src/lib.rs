//! Finite-dimensional quantum channel toolkit.
//!
//! - [`channel`]: Kraus and Stinespring channels, dual and complementary maps.
//! - [`dilation`]: conversions between Kraus, Stinespring and unitary
//!   dilation forms, purification and unitary completion of partial
//!   isometries.
//! - [`sequences`]: channel sequences, strong / weak / strong* / Choi
//!   defect sweeps and the standard counterexample families.
//! - [`gaussian`]: parameter-level bosonic Gaussian states and channels.
//!
//! Tensor factors are flattened row-major: `(b, e) ↦ b * d_E + e`.

pub mod channel;
pub mod dilation;
pub mod error;
pub mod gaussian;
pub mod json;
pub mod linalg;
pub mod operators;
pub mod random;
pub mod sequences;
pub mod tolerance;

pub use channel::{
    action_deviation, apply_kraus, apply_stinespring, complementary, dual_apply, KrausChannel,
    StinespringIsometry,
};
pub use error::{Error, Result};
pub use linalg::{partial_trace, tensor, trace_norm, CMatrix, CVector, Factor};
pub use operators::{DensityOperator, Observable, PartialIsometry, UnitaryOp};
