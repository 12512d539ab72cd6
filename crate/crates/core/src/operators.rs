//! Validated operator types: states, observables, unitaries and partial
//! isometries. All of them check their invariants on construction and are
//! immutable afterwards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{self, CMatrix, CVector};
use crate::tolerance;

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::ZeroDimension("operator"));
    }
    if !linalg::is_finite(m) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        let herm = linalg::hermitian_deviation(&matrix);
        if herm > tolerance::HERMITIAN {
            return Err(Error::NotHermitian(herm));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tolerance::VALIDATION {
            return Err(Error::InvalidTrace(trace));
        }
        let min = linalg::eigh(&matrix).values[0];
        if min < tolerance::PSD_FLOOR {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { matrix })
    }

    /// Wraps the Hermitian part of a matrix known to be a state up to
    /// rounding, e.g. the output of a channel applied to a valid state.
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self {
            matrix: linalg::hermitian_part(&matrix),
        }
    }

    /// Pure state `|v><v|` of a unit vector.
    pub fn pure(v: &CVector) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > tolerance::VALIDATION {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(linalg::outer(v, v))
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension("state"));
        }
        Ok(Self {
            matrix: linalg::identity(d).unscale(d as f64),
        })
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(&CVector::from_iterator(
            probabilities.len(),
            probabilities.iter().map(|p| linalg::c64(*p, 0.0)),
        )))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// A bounded operator on the output space; no Hermiticity required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct Observable {
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square(&matrix)?;
        Ok(Self { matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: linalg::identity(d),
        }
    }

    /// Matrix unit `|i><j|` on `C^d`.
    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        Self {
            matrix: linalg::matrix_unit(d, d, i, j),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// A square unitary matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct UnitaryOp {
    matrix: CMatrix,
}

impl UnitaryOp {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = check_square(&matrix)?;
        let id = linalg::identity(d);
        let left = linalg::op_norm(&(matrix.adjoint() * &matrix - &id));
        let right = linalg::op_norm(&(&matrix * matrix.adjoint() - &id));
        let deviation = left.max(right);
        if deviation > tolerance::VALIDATION {
            return Err(Error::NotUnitary(deviation));
        }
        Ok(Self { matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: linalg::identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// An operator `W` whose initial projector `W^*W` is an orthogonal
/// projector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct PartialIsometry {
    matrix: CMatrix,
}

impl PartialIsometry {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::ZeroDimension("partial isometry"));
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let p = matrix.adjoint() * &matrix;
        let deviation = linalg::op_norm(&(&p * &p - &p));
        if deviation > tolerance::VALIDATION {
            return Err(Error::NotPartialIsometry(deviation));
        }
        Ok(Self { matrix })
    }

    pub fn d_in(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Initial projector `W^*W`.
    pub fn initial_projector(&self) -> CMatrix {
        self.matrix.adjoint() * &self.matrix
    }

    /// Final projector `WW^*`.
    pub fn final_projector(&self) -> CMatrix {
        &self.matrix * self.matrix.adjoint()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RawMatrix(#[serde(with = "json::cmatrix")] CMatrix);

macro_rules! raw_conversions {
    ($($ty:ident),*) => {$(
        impl TryFrom<RawMatrix> for $ty {
            type Error = Error;
            fn try_from(raw: RawMatrix) -> Result<Self> {
                $ty::new(raw.0)
            }
        }

        impl From<$ty> for RawMatrix {
            fn from(value: $ty) -> Self {
                RawMatrix(value.into_matrix())
            }
        }
    )*};
}

raw_conversions!(DensityOperator, Observable, UnitaryOp, PartialIsometry);
