//! Seeded random instances for test families and property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::KrausChannel;
use crate::linalg::{self, c64, CMatrix, CVector};
use crate::operators::{DensityOperator, Observable, PartialIsometry, UnitaryOp};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unit vector in `C^dim`.
pub fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> CVector {
    let g = ginibre(rng, dim, 1);
    let v = g.column(0).into_owned();
    let n = v.norm();
    v.unscale(n)
}

/// Haar-random isometry `C^cols → C^rows`, `rows >= cols`.
pub fn isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rng, rows, cols);
    let qr = g.clone().qr();
    let q = qr.q();
    let r = qr.r();
    // fix column phases so the distribution is Haar
    let mut q = q.columns(0, cols).into_owned();
    for k in 0..cols {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..rows {
                q[(i, k)] *= phase;
            }
        }
    }
    q
}

pub fn unitary<R: Rng>(rng: &mut R, d: usize) -> UnitaryOp {
    UnitaryOp::new(isometry(rng, d, d)).expect("Haar isometry is unitary")
}

/// Random mixed state of the given rank.
pub fn state<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, dim, rank.max(1));
    let m = &g * g.adjoint();
    let t = m.trace().re;
    DensityOperator::new(linalg::hermitian_part(&m.unscale(t))).expect("Wishart matrix is a state")
}

pub fn pure_state<R: Rng>(rng: &mut R, dim: usize) -> DensityOperator {
    DensityOperator::pure(&unit_vector(rng, dim)).expect("unit vector")
}

/// General (non-Hermitian) observable with Gaussian entries.
pub fn observable<R: Rng>(rng: &mut R, dim: usize) -> Observable {
    Observable::new(ginibre(rng, dim, dim)).expect("square")
}

/// Random channel with `n_kraus` operators, raised to the smallest count
/// that admits an isometry when `d_out * n_kraus < d_in`.
pub fn channel<R: Rng>(rng: &mut R, d_in: usize, d_out: usize, n_kraus: usize) -> KrausChannel {
    let k = n_kraus.max(d_in.div_ceil(d_out)).max(1);
    let v = isometry(rng, d_out * k, d_in);
    let kraus = (0..k)
        .map(|i| CMatrix::from_fn(d_out, d_in, |b, a| v[(b * k + i, a)]))
        .collect();
    KrausChannel::new(d_in, d_out, kraus).expect("isometry yields a channel")
}

/// Random partial isometry on `C^dim` of the given rank.
pub fn partial_isometry<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> PartialIsometry {
    let initial = isometry(rng, dim, rank);
    let final_ = isometry(rng, dim, rank);
    PartialIsometry::new(final_ * initial.adjoint()).expect("product of isometries")
}
