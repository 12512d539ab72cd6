//! Convergence defects of a sequence at a single index.

use serde::{Deserialize, Serialize};

use super::{ChannelSequence, Labeled};
use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::operators::{DensityOperator, Observable};

/// A maximum over a test family together with the member that attained it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub value: f64,
    pub witness: String,
}

impl Defect {
    fn zero() -> Self {
        Self {
            value: 0.0,
            witness: String::new(),
        }
    }

    fn offer(&mut self, value: f64, witness: impl FnOnce() -> String) {
        if value > self.value || self.witness.is_empty() {
            self.value = value.max(self.value);
            self.witness = witness();
        }
    }
}

fn nonempty<T>(items: &[T], what: &'static str) -> Result<()> {
    if items.is_empty() {
        Err(Error::Empty(what))
    } else {
        Ok(())
    }
}

fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

/// `max_ρ ‖Φ_n(ρ) − Φ_0(ρ)‖_1` over the test states.
pub fn strong_defect(seq: &ChannelSequence, n: usize, states: &[Labeled<DensityOperator>]) -> Result<Defect> {
    strong_gap(&seq.term(n)?, seq.limit(), states)
}

/// `max |Tr B(Φ_n − Φ_0)(ρ)|` over pairs of test states and observables.
pub fn weak_defect(
    seq: &ChannelSequence,
    n: usize,
    states: &[Labeled<DensityOperator>],
    observables: &[Labeled<Observable>],
) -> Result<Defect> {
    weak_gap(&seq.term(n)?, seq.limit(), states, observables)
}

/// `max ‖(Φ_n^*(B) − Φ_0^*(B))φ‖` over test observables and vectors.
pub fn strongstar_defect(
    seq: &ChannelSequence,
    n: usize,
    observables: &[Labeled<Observable>],
    vectors: &[Labeled<CVector>],
) -> Result<Defect> {
    strongstar_gap(&seq.term(n)?, seq.limit(), observables, vectors)
}

/// `‖J(Φ_n) − J(Φ_0)‖_1 / d_A`, a lower bound on the diamond-norm distance.
pub fn choi_defect(seq: &ChannelSequence, n: usize) -> Result<f64> {
    Ok(choi_gap(&seq.term(n)?, seq.limit()))
}

/// `max_ψ ‖(Φ_n ⊗ id)(|ψ><ψ|) − (Φ_0 ⊗ id)(|ψ><ψ|)‖_1` over unit vectors
/// `ψ` on `C^{d_A} ⊗ C^{d_A}` (input index `a * d_A + a'`).
pub fn stabilized_defect(seq: &ChannelSequence, n: usize, vectors: &[Labeled<CVector>]) -> Result<Defect> {
    stabilized_gap(&seq.term(n)?, seq.limit(), vectors)
}

pub(crate) fn strong_gap(
    phi: &KrausChannel,
    psi: &KrausChannel,
    states: &[Labeled<DensityOperator>],
) -> Result<Defect> {
    nonempty(states, "test states")?;
    let mut best = Defect::zero();
    for (label, rho) in states {
        check_dim("test state", phi.d_in(), rho.dim())?;
        let diff = phi.apply_matrix(rho.matrix()) - psi.apply_matrix(rho.matrix());
        best.offer(linalg::trace_norm(&diff), || label.clone());
    }
    Ok(best)
}

pub(crate) fn weak_gap(
    phi: &KrausChannel,
    psi: &KrausChannel,
    states: &[Labeled<DensityOperator>],
    observables: &[Labeled<Observable>],
) -> Result<Defect> {
    nonempty(states, "test states")?;
    nonempty(observables, "test observables")?;
    let mut best = Defect::zero();
    for (s_label, rho) in states {
        check_dim("test state", phi.d_in(), rho.dim())?;
        let diff = phi.apply_matrix(rho.matrix()) - psi.apply_matrix(rho.matrix());
        for (o_label, b) in observables {
            check_dim("test observable", phi.d_out(), b.dim())?;
            let value = (b.matrix() * &diff).trace().norm();
            best.offer(value, || format!("{o_label}|{s_label}"));
        }
    }
    Ok(best)
}

pub(crate) fn strongstar_gap(
    phi: &KrausChannel,
    psi: &KrausChannel,
    observables: &[Labeled<Observable>],
    vectors: &[Labeled<CVector>],
) -> Result<Defect> {
    nonempty(observables, "test observables")?;
    nonempty(vectors, "test vectors")?;
    let mut best = Defect::zero();
    for (o_label, b) in observables {
        check_dim("test observable", phi.d_out(), b.dim())?;
        let diff = phi.dual_matrix(b.matrix()) - psi.dual_matrix(b.matrix());
        for (v_label, v) in vectors {
            check_dim("test vector", phi.d_in(), v.len())?;
            best.offer((&diff * v).norm(), || format!("{o_label}|{v_label}"));
        }
    }
    Ok(best)
}

pub(crate) fn choi_gap(phi: &KrausChannel, psi: &KrausChannel) -> f64 {
    linalg::trace_norm(&(phi.choi() - psi.choi())) / phi.d_in() as f64
}

pub(crate) fn stabilized_gap(phi: &KrausChannel, psi: &KrausChannel, vectors: &[Labeled<CVector>]) -> Result<Defect> {
    nonempty(vectors, "test vectors")?;
    let d = phi.d_in();
    let ancilla = KrausChannel::identity(d);
    let (big_phi, big_psi) = (phi.tensor(&ancilla), psi.tensor(&ancilla));
    let mut best = Defect::zero();
    for (label, v) in vectors {
        check_dim("stabilized test vector", d * d, v.len())?;
        let rho = linalg::outer(v, v);
        let diff = big_phi.apply_matrix(&rho) - big_psi.apply_matrix(&rho);
        best.offer(linalg::trace_norm(&diff), || label.clone());
    }
    Ok(best)
}

/// Vectors for [`stabilized_defect`]: the normalized maximally entangled
/// vector `Ω` followed by the given extra vectors.
pub fn stabilized_vectors(d: usize, extra: Vec<Labeled<CVector>>) -> Vec<Labeled<CVector>> {
    let s = 1.0 / (d as f64).sqrt();
    let omega = CVector::from_fn(d * d, |k, _| if k / d == k % d { linalg::c64(s, 0.0) } else { linalg::ZERO });
    let mut out = vec![("omega".to_string(), omega)];
    out.extend(extra);
    out
}

/// Compares `‖(Φ_n^* − Φ_0^*)(B)φ‖` with the bound obtained by expanding
/// `B` in matrix units, `Σ_ij |B_ij| ‖(Φ_n^* − Φ_0^*)(E_ij)φ‖`. Returns
/// `(direct, bound)`; linearity forces `direct <= bound`.
pub fn matrix_unit_bound(seq: &ChannelSequence, n: usize, b: &Observable, phi: &CVector) -> Result<(f64, f64)> {
    let term = seq.term(n)?;
    let limit = seq.limit();
    check_dim("observable", term.d_out(), b.dim())?;
    check_dim("vector", term.d_in(), phi.len())?;
    let delta = |x: &CMatrix| (term.dual_matrix(x) - limit.dual_matrix(x)) * phi;
    let direct = delta(b.matrix()).norm();
    let d = b.dim();
    let mut bound = 0.0;
    for i in 0..d {
        for j in 0..d {
            let coeff = b.matrix()[(i, j)].norm();
            if coeff > 0.0 {
                bound += coeff * delta(&linalg::matrix_unit(d, d, i, j)).norm();
            }
        }
    }
    Ok((direct, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, c64};
    use crate::operators::UnitaryOp;
    use crate::sequences::TestFamily;

    fn phase_sequence(thetas: Vec<f64>) -> ChannelSequence {
        let indices = (1..=thetas.len()).collect();
        ChannelSequence::new("phase", KrausChannel::identity(2), indices, move |n| {
            let t = thetas[n - 1];
            let u = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(1.0, 0.0), c64(t.cos(), t.sin())]));
            Ok(KrausChannel::unitary(&UnitaryOp::new(u)?))
        })
    }

    #[test]
    fn constant_sequence_has_no_defect() {
        let fam = TestFamily::standard(2, 2, 3, 4);
        let seq = ChannelSequence::constant(crate::random::channel(&mut crate::random::rng(2), 2, 2, 2), vec![1]);
        assert_eq!(strong_defect(&seq, 1, &fam.states).unwrap().value, 0.0);
        assert_eq!(weak_defect(&seq, 1, &fam.states, &fam.observables).unwrap().value, 0.0);
        assert_eq!(strongstar_defect(&seq, 1, &fam.observables, &fam.vectors).unwrap().value, 0.0);
        assert_eq!(choi_defect(&seq, 1).unwrap(), 0.0);
    }

    #[test]
    fn empty_families_rejected() {
        let seq = ChannelSequence::constant(KrausChannel::identity(2), vec![1]);
        assert!(matches!(strong_defect(&seq, 1, &[]), Err(Error::Empty(_))));
        let obs = vec![("I".to_string(), Observable::identity(2))];
        assert!(matches!(strongstar_defect(&seq, 1, &obs, &[]), Err(Error::Empty(_))));
        assert!(matches!(weak_defect(&seq, 1, &[], &obs), Err(Error::Empty(_))));
    }

    #[test]
    fn phase_rotation_choi_defect() {
        // J(U) = |u><u| with u = (1, 0, 0, e^{iθ}); two pure vectors of norm
        // √2 differ in trace norm by 2·sqrt(4 − |1 + e^{iθ}|²)
        let thetas = vec![0.1, 0.5, 1.0, 2.0];
        let seq = phase_sequence(thetas.clone());
        let mut last = 0.0;
        for (k, t) in thetas.iter().enumerate() {
            let overlap = (c64(1.0, 0.0) + c64(t.cos(), t.sin())).norm_sqr();
            let expected = 2.0 * (4.0 - overlap).sqrt() / 2.0;
            let got = choi_defect(&seq, k + 1).unwrap();
            assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
            assert!(got > last);
            last = got;
        }
    }

    #[test]
    fn witness_labels_name_the_maximizer() {
        let seq = phase_sequence(vec![1.0]);
        let fam = TestFamily::standard(2, 2, 0, 0);
        let d = strong_defect(&seq, 1, &fam.states).unwrap();
        // basis states are invariant, superpositions are not
        assert!(d.witness.starts_with('p') || d.witness.starts_with('q'));
        let basis = vec![("e0".to_string(), DensityOperator::pure(&basis_vector(2, 0)).unwrap())];
        assert_eq!(strong_defect(&seq, 1, &basis).unwrap().value, 0.0);
    }

    #[test]
    fn stabilized_dominates_choi_on_omega() {
        // at the maximally entangled input the stabilized distance is the
        // normalized Choi distance
        let seq = phase_sequence(vec![0.7]);
        let vectors = stabilized_vectors(2, Vec::new());
        let stab = stabilized_defect(&seq, 1, &vectors).unwrap();
        assert!((stab.value - choi_defect(&seq, 1).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn matrix_unit_expansion_bounds_direct_value() {
        let seq = phase_sequence(vec![0.4]);
        let mut rng = crate::random::rng(3);
        let b = crate::random::observable(&mut rng, 2);
        let v = crate::random::unit_vector(&mut rng, 2);
        let (direct, bound) = matrix_unit_bound(&seq, 1, &b, &v).unwrap();
        assert!(direct <= bound + 1e-12);
        assert!(direct > 0.0);
    }
}
