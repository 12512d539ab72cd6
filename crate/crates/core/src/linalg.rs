//! Dense complex linear algebra used throughout the crate.
//!
//! Tensor products follow one flattening convention everywhere: the pair
//! `(i, k)` of a product space `H_1 ⊗ H_2` maps to the flat index
//! `i * dim(H_2) + k`. For a Stinespring space `H_B ⊗ H_E` this reads
//! `(b, e) ↦ b * d_E + e`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Standard basis vector `e_k` of `C^dim`.
pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

/// Matrix unit `|i><j|` of size `rows x cols`.
pub fn matrix_unit(rows: usize, cols: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    m[(i, j)] = ONE;
    m
}

/// Rank-one operator `|u><v|`.
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// Kronecker product `x ⊗ y` with `(i, k) ↦ i * rows(y) + k`.
pub fn tensor(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x.kronecker(y)
}

pub fn tensor_vec(x: &CVector, y: &CVector) -> CVector {
    x.kronecker(y)
}

/// Which factor of a bipartite space `H_1 ⊗ H_2` is traced out.
///
/// In Stinespring terms `First` is the output system B and `Second` the
/// environment E.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Partial trace of a square matrix on `C^{d1} ⊗ C^{d2}`.
///
/// `Factor::Second` returns `(Tr_2 X)_{a,a'} = Σ_k X_{(a,k),(a',k)}`, a
/// `d1 x d1` matrix; `Factor::First` returns the `d2 x d2` reduction.
pub fn partial_trace(x: &CMatrix, which: Factor, d1: usize, d2: usize) -> Result<CMatrix> {
    let n = d1 * d2;
    if x.nrows() != x.ncols() {
        return Err(Error::NotSquare {
            rows: x.nrows(),
            cols: x.ncols(),
        });
    }
    if x.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: n,
            found: x.nrows(),
        });
    }
    Ok(match which {
        Factor::Second => CMatrix::from_fn(d1, d1, |a, b| {
            (0..d2).map(|k| x[(a * d2 + k, b * d2 + k)]).sum()
        }),
        Factor::First => CMatrix::from_fn(d2, d2, |e, f| {
            (0..d1).map(|k| x[(k * d2 + e, k * d2 + f)]).sum()
        }),
    })
}

pub fn max_abs(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_finite(x: &CMatrix) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Entrywise `max |X - X^*|`.
pub fn hermitian_deviation(x: &CMatrix) -> f64 {
    if x.nrows() != x.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(x - x.adjoint()))
}

pub fn hermitian_part(x: &CMatrix) -> CMatrix {
    (x + x.adjoint()).scale(0.5)
}

pub fn singular_values(x: &CMatrix) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    x.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Largest singular value.
pub fn op_norm(x: &CMatrix) -> f64 {
    singular_values(x).into_iter().fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn trace_norm(x: &CMatrix) -> f64 {
    singular_values(x).into_iter().sum()
}

/// Number of singular values above `tol`.
pub fn numerical_rank(x: &CMatrix, tol: f64) -> usize {
    singular_values(x).into_iter().filter(|s| *s > tol).count()
}

/// Rotates `v` so that its first entry of non-negligible magnitude is real
/// and positive.
pub fn fix_phase(v: &mut CVector) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let phase = lead.conj() / lead.norm();
        v.apply(|z| *z *= phase);
    }
}

fn lexicographic(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, aligned with `values`.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }
}

/// Deterministic Hermitian eigendecomposition.
///
/// Eigenvalues ascend. Each eigenvector has its leading entry made real
/// positive, and within a group of eigenvalues closer than
/// [`tolerance::EIGEN_TIE`] the vectors are ordered lexicographically by the
/// real then imaginary parts of their entries.
pub fn eigh(x: &CMatrix) -> Eigh {
    let n = x.nrows();
    if n == 0 {
        return Eigh {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let decomposition = hermitian_part(x).symmetric_eigen();
    let mut pairs: Vec<(f64, CVector)> = (0..n)
        .map(|k| {
            let mut v = decomposition.eigenvectors.column(k).into_owned();
            fix_phase(&mut v);
            (decomposition.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end].0 - pairs[end - 1].0 <= tolerance::EIGEN_TIE {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| lexicographic(&a.1, &b.1));
        start = end;
    }

    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| pairs[k].1[i]);
    Eigh { values, vectors }
}

/// Eigenvalues above `cutoff`, sorted in descending order.
pub fn nonzero_spectrum(x: &CMatrix, cutoff: f64) -> Vec<f64> {
    let mut values: Vec<f64> = eigh(x).values.into_iter().filter(|v| *v > cutoff).collect();
    values.reverse();
    values
}

/// Orthonormal basis of the range of a Hermitian positive semidefinite
/// matrix, taken from eigenvectors whose eigenvalue exceeds `threshold`.
pub fn range_basis(p: &CMatrix, threshold: f64) -> Vec<CVector> {
    let decomposition = eigh(p);
    decomposition
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > threshold)
        .map(|(k, _)| decomposition.vector(k))
        .collect()
}

fn project_out(v: &mut CVector, basis: &[CVector]) {
    // two passes keep the residual orthogonal at machine precision
    for _ in 0..2 {
        for q in basis {
            let overlap = q.dotc(v);
            v.axpy(-overlap, q, ONE);
        }
    }
}

/// Orthonormal completion of `basis` (assumed orthonormal) to a basis of
/// `C^dim`.
///
/// Vectors are produced by pivoted Gram–Schmidt over the standard basis: at
/// each step the standard vector with the largest residual is chosen, the
/// lowest index winning ties. The result depends only on `basis`.
pub fn orthonormal_complement(basis: &[CVector], dim: usize) -> Vec<CVector> {
    let mut span: Vec<CVector> = basis.to_vec();
    let mut added = Vec::new();
    while span.len() < dim {
        let mut best: Option<(f64, CVector)> = None;
        for k in 0..dim {
            let mut r = basis_vector(dim, k);
            project_out(&mut r, &span);
            let n = r.norm();
            if best.as_ref().is_none_or(|(bn, _)| n > bn + 1e-12) {
                best = Some((n, r));
            }
        }
        let (n, mut r) = best.expect("dim > 0");
        if n < 1e-6 {
            // the supplied basis was not orthonormal
            break;
        }
        r.unscale_mut(n);
        fix_phase(&mut r);
        span.push(r.clone());
        added.push(r);
    }
    added
}

/// Matrix whose columns are the given vectors.
pub fn columns(vectors: &[CVector], dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, vectors.len(), |i, k| vectors[k][i])
}
