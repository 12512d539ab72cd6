//! Conversions between channel representations.
//!
//! Every direction between Kraus families, Stinespring isometries and
//! unitary dilations is an explicit construction, together with the two
//! completion procedures that turn partial isometries into unitaries: a
//! one-shot completion and a tracked one that keeps the added basis close
//! to a reference along a sequence.

use serde::{Deserialize, Serialize};

use crate::channel::{KrausChannel, StinespringIsometry};
use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{self, CMatrix, CVector, Factor};
use crate::operators::{DensityOperator, PartialIsometry, UnitaryOp};
use crate::tolerance;

/// `A_i = (I_B ⊗ <e_i|) V` for every environment basis vector `e_i`.
///
/// Zero operators are kept so that index `i` always refers to `e_i`.
pub fn kraus_from_isometry(v: &StinespringIsometry) -> KrausChannel {
    let (d_a, d_b, d_e) = (v.d_a(), v.d_b(), v.d_e());
    let m = v.matrix();
    let kraus = (0..d_e)
        .map(|i| CMatrix::from_fn(d_b, d_a, |b, a| m[(b * d_e + i, a)]))
        .collect();
    KrausChannel::new(d_a, d_b, kraus).expect("isometry rows give a complete Kraus family")
}

/// `V|φ> = Σ_i A_i|φ> ⊗ |e_i>` with `d_E` equal to the number of operators.
pub fn isometry_from_kraus(ch: &KrausChannel) -> StinespringIsometry {
    let (d_a, d_b, d_e) = (ch.d_in(), ch.d_out(), ch.len());
    let v = CMatrix::from_fn(d_b * d_e, d_a, |r, a| ch.kraus()[r % d_e][(r / d_e, a)]);
    StinespringIsometry::new(d_a, d_b, d_e, v).expect("complete Kraus family stacks to an isometry")
}

/// Number of Choi eigenvalues above [`tolerance::CHOI_RANK_CUTOFF`].
pub fn choi_rank(ch: &KrausChannel) -> usize {
    linalg::eigh(&ch.choi())
        .values
        .iter()
        .filter(|v| **v > tolerance::CHOI_RANK_CUTOFF)
        .count()
}

/// Kraus family read off the Choi eigendecomposition, largest eigenvalue
/// first. Its length is the Choi rank.
pub fn minimal_kraus(ch: &KrausChannel) -> KrausChannel {
    let (d_in, d_out) = (ch.d_in(), ch.d_out());
    let decomposition = linalg::eigh(&ch.choi());
    let kraus: Vec<CMatrix> = (0..decomposition.values.len())
        .rev()
        .filter(|k| decomposition.values[*k] > tolerance::CHOI_RANK_CUTOFF)
        .map(|k| {
            let scale = decomposition.values[k].sqrt();
            let v = decomposition.vector(k);
            CMatrix::from_fn(d_out, d_in, |b, a| v[b * d_in + a] * scale)
        })
        .collect();
    KrausChannel::new(d_in, d_out, kraus).expect("Choi eigenvectors reproduce a channel")
}

/// Stinespring isometry with environment dimension equal to the Choi rank.
pub fn minimal_stinespring(ch: &KrausChannel) -> StinespringIsometry {
    isometry_from_kraus(&minimal_kraus(ch))
}

/// Dimension of the span of `{(B ⊗ I_E) V|φ>}` over matrix units `B` and
/// basis vectors `φ`. Equals `d_B * d_E` exactly when `V` is minimal.
pub fn minimality_rank(v: &StinespringIsometry) -> usize {
    let (d_a, d_b, d_e) = (v.d_a(), v.d_b(), v.d_e());
    let m = v.matrix();
    let mut cols = Vec::with_capacity(d_b * d_b * d_a);
    for b in 0..d_b {
        for b2 in 0..d_b {
            for a in 0..d_a {
                let mut w = CVector::zeros(d_b * d_e);
                for e in 0..d_e {
                    w[b * d_e + e] = m[(b2 * d_e + e, a)];
                }
                cols.push(w);
            }
        }
    }
    linalg::numerical_rank(&linalg::columns(&cols, d_b * d_e), tolerance::SPECTRAL)
}

pub fn is_minimal(v: &StinespringIsometry) -> bool {
    minimality_rank(v) == v.d_b() * v.d_e()
}

/// A unitary `U: C^{d_A} ⊗ C^{d_D} → C^{d_B} ⊗ C^{d_E'}` with pure ancilla
/// `τ_0`, acting as `ρ ↦ Tr_{E'} U(ρ ⊗ |τ_0><τ_0|)U^*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDilation", into = "RawDilation")]
pub struct UnitaryDilation {
    d_a: usize,
    d_d: usize,
    d_b: usize,
    d_eprime: usize,
    u: UnitaryOp,
    tau0: CVector,
}

#[derive(Serialize, Deserialize)]
struct RawDilation {
    d_a: usize,
    d_d: usize,
    d_b: usize,
    d_eprime: usize,
    u: UnitaryOp,
    #[serde(with = "json::cvector")]
    tau0: CVector,
}

impl TryFrom<RawDilation> for UnitaryDilation {
    type Error = Error;
    fn try_from(raw: RawDilation) -> Result<Self> {
        UnitaryDilation::new(raw.d_a, raw.d_d, raw.d_b, raw.d_eprime, raw.u, raw.tau0)
    }
}

impl From<UnitaryDilation> for RawDilation {
    fn from(d: UnitaryDilation) -> Self {
        RawDilation {
            d_a: d.d_a,
            d_d: d.d_d,
            d_b: d.d_b,
            d_eprime: d.d_eprime,
            u: d.u,
            tau0: d.tau0,
        }
    }
}

impl UnitaryDilation {
    pub fn new(
        d_a: usize,
        d_d: usize,
        d_b: usize,
        d_eprime: usize,
        u: UnitaryOp,
        tau0: CVector,
    ) -> Result<Self> {
        if d_a == 0 || d_d == 0 || d_b == 0 || d_eprime == 0 {
            return Err(Error::ZeroDimension("unitary dilation"));
        }
        if d_a * d_d != d_b * d_eprime {
            return Err(Error::DimensionMismatch {
                context: "dilation product d_A*d_D vs d_B*d_E'",
                expected: d_a * d_d,
                found: d_b * d_eprime,
            });
        }
        if u.dim() != d_a * d_d {
            return Err(Error::DimensionMismatch {
                context: "dilation unitary size",
                expected: d_a * d_d,
                found: u.dim(),
            });
        }
        if tau0.len() != d_d {
            return Err(Error::DimensionMismatch {
                context: "ancilla vector",
                expected: d_d,
                found: tau0.len(),
            });
        }
        let norm = tau0.norm();
        if (norm - 1.0).abs() > tolerance::ARITHMETIC {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            d_a,
            d_d,
            d_b,
            d_eprime,
            u,
            tau0,
        })
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_d(&self) -> usize {
        self.d_d
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_eprime(&self) -> usize {
        self.d_eprime
    }

    pub fn unitary(&self) -> &UnitaryOp {
        &self.u
    }

    pub fn tau0(&self) -> &CVector {
        &self.tau0
    }

    /// `P|φ> = |φ> ⊗ τ_0` as a `(d_A d_D) x d_A` matrix.
    fn ancilla_embedding(&self) -> CMatrix {
        let tau = CMatrix::from_column_slice(self.d_d, 1, self.tau0.as_slice());
        linalg::tensor(&linalg::identity(self.d_a), &tau)
    }

    /// `Tr_{E'} U(ρ ⊗ |τ_0><τ_0|)U^*`.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.d_a {
            return Err(Error::DimensionMismatch {
                context: "unitary dilation input",
                expected: self.d_a,
                found: rho.dim(),
            });
        }
        let sigma = linalg::outer(&self.tau0, &self.tau0);
        let joint = linalg::tensor(rho.matrix(), &sigma);
        let u = self.u.matrix();
        let out = u * joint * u.adjoint();
        Ok(DensityOperator::from_trusted(linalg::partial_trace(
            &out,
            Factor::Second,
            self.d_b,
            self.d_eprime,
        )?))
    }
}

/// `V|φ> = U|φ ⊗ τ_0>` with output factors `(d_B, d_E')`.
pub fn stinespring_from_unitary(dil: &UnitaryDilation) -> StinespringIsometry {
    let v = dil.u.matrix() * dil.ancilla_embedding();
    StinespringIsometry::new(dil.d_a, dil.d_b, dil.d_eprime, v)
        .expect("unitary restricted to the ancilla slice is an isometry")
}

/// Completes `(V ⊗ χ_0)(I_A ⊗ <τ_0|)` to a unitary on `C^{d_A} ⊗ C^{d_D}`,
/// so that `U(φ ⊗ τ_0) = Vφ ⊗ χ_0`. The environment of the result is
/// `E ⊗ C`.
pub fn unitary_from_isometry(
    v: &StinespringIsometry,
    d_d: usize,
    d_c: usize,
    tau0: &CVector,
    chi0: &CVector,
) -> Result<UnitaryDilation> {
    let (d_a, d_b, d_e) = (v.d_a(), v.d_b(), v.d_e());
    if d_d == 0 || d_c == 0 {
        return Err(Error::ZeroDimension("ancilla"));
    }
    if d_a * d_d != d_b * d_e * d_c {
        return Err(Error::DimensionMismatch {
            context: "d_A*d_D vs d_B*d_E*d_C",
            expected: d_a * d_d,
            found: d_b * d_e * d_c,
        });
    }
    for (vec, dim, context) in [(tau0, d_d, "tau0 length"), (chi0, d_c, "chi0 length")] {
        if vec.len() != dim {
            return Err(Error::DimensionMismatch {
                context,
                expected: dim,
                found: vec.len(),
            });
        }
        let norm = vec.norm();
        if (norm - 1.0).abs() > tolerance::ARITHMETIC {
            return Err(Error::NotNormalized(norm));
        }
    }
    let chi = CMatrix::from_column_slice(d_c, 1, chi0.as_slice());
    let tau = CMatrix::from_column_slice(d_d, 1, tau0.as_slice());
    let embedded = linalg::tensor(v.matrix(), &chi);
    let slice = linalg::tensor(&linalg::identity(d_a), &tau);
    let w = PartialIsometry::new(embedded * slice.adjoint())?;
    let u = complete_unitary(&w)?;
    UnitaryDilation::new(d_a, d_d, d_b, d_e * d_c, u, tau0.clone())
}

/// [`unitary_from_isometry`] with `d_D = d_B d_E`, `d_C = d_A` and both
/// ancilla vectors equal to the first basis vector.
pub fn unitary_from_isometry_default(v: &StinespringIsometry) -> Result<UnitaryDilation> {
    let d_d = v.d_b() * v.d_e();
    let d_c = v.d_a();
    unitary_from_isometry(
        v,
        d_d,
        d_c,
        &linalg::basis_vector(d_d, 0),
        &linalg::basis_vector(d_c, 0),
    )
}

/// Purification `Σ_k √p_k |v_k> ⊗ |e_k>` in `C^{dim} ⊗ C^{rank}`.
///
/// Eigenpairs come from the deterministic decomposition, largest weight
/// first, dropping eigenvalues at or below [`tolerance::PURIFY_CUTOFF`]. The
/// first non-negligible amplitude is real positive.
pub fn purify(sigma: &DensityOperator) -> CVector {
    let d = sigma.dim();
    let decomposition = linalg::eigh(sigma.matrix());
    let kept: Vec<usize> = (0..d)
        .rev()
        .filter(|k| decomposition.values[*k] > tolerance::PURIFY_CUTOFF)
        .collect();
    let r = kept.len();
    let mut psi = CVector::zeros(d * r);
    for (slot, k) in kept.iter().enumerate() {
        let weight = decomposition.values[*k].sqrt();
        let v = decomposition.vector(*k);
        for a in 0..d {
            psi[a * r + slot] = v[a] * weight;
        }
    }
    let n = psi.norm();
    psi.unscale_mut(n);
    linalg::fix_phase(&mut psi);
    psi
}

/// Replaces a mixed ancilla state by its purification: the unitary becomes
/// `U ⊗ I_R` and the ancilla `τ_0 = purify(σ)` on `D ⊗ R`.
pub fn purified_dilation(
    u: &UnitaryOp,
    d_a: usize,
    d_b: usize,
    sigma: &DensityOperator,
) -> Result<UnitaryDilation> {
    let d_d = sigma.dim();
    if u.dim() != d_a * d_d || !u.dim().is_multiple_of(d_b) {
        return Err(Error::DimensionMismatch {
            context: "purified dilation unitary",
            expected: d_a * d_d,
            found: u.dim(),
        });
    }
    let d_e = u.dim() / d_b;
    let tau = purify(sigma);
    let r = tau.len() / d_d;
    let lifted = UnitaryOp::new(linalg::tensor(u.matrix(), &linalg::identity(r)))?;
    UnitaryDilation::new(d_a, d_d * r, d_b, d_e * r, lifted, tau)
}

fn kernel_basis(projector: &CMatrix) -> (Vec<CVector>, Vec<CVector>) {
    let range = linalg::range_basis(projector, 0.5);
    let kernel = linalg::orthonormal_complement(&range, projector.nrows());
    (range, kernel)
}

/// Unitary `U` with `U P = W` for `P = W^*W`, mapping the deterministic
/// orthonormal basis of `ker P` onto that of `ker WW^*` in order.
pub fn complete_unitary(w: &PartialIsometry) -> Result<UnitaryOp> {
    let d = w.d_in();
    if w.d_out() != d {
        return Err(Error::DimensionMismatch {
            context: "complete_unitary needs a square partial isometry",
            expected: d,
            found: w.d_out(),
        });
    }
    let (range_p, ker_p) = kernel_basis(&w.initial_projector());
    let (range_q, ker_q) = kernel_basis(&w.final_projector());
    if range_p.len() != range_q.len() || ker_p.len() != ker_q.len() {
        return Err(Error::RankMismatch {
            initial: range_p.len(),
            final_rank: range_q.len(),
        });
    }
    let mut u = w.matrix().clone();
    for (f, g) in ker_p.iter().zip(&ker_q) {
        u += linalg::outer(g, f);
    }
    UnitaryOp::new(u)
}

/// Orthonormal extensions tracked along a sequence of partial isometries.
#[derive(Debug, Clone)]
pub struct TrackedBasisExtension {
    /// Complement of the range of `W_0`, as mapped by the reference unitary.
    pub reference_basis: Vec<CVector>,
    /// Per-index complements of the range of `W_n`, aligned with
    /// `reference_basis`.
    pub extensions: Vec<Vec<CVector>>,
    /// `degenerate[n][j]` is set when the projected reference vector was
    /// lost and a deterministic complement vector was used instead.
    pub degenerate: Vec<Vec<bool>>,
}

impl TrackedBasisExtension {
    /// Largest deviation from orthonormality of an extension, or from
    /// orthogonality to the range of the corresponding `W_n`.
    pub fn max_violation(&self, w_seq: &[PartialIsometry]) -> f64 {
        let mut worst: f64 = 0.0;
        for (ext, w) in self.extensions.iter().zip(w_seq) {
            let d = w.d_out();
            let m = linalg::columns(ext, d);
            let gram = m.adjoint() * &m - linalg::identity(ext.len());
            worst = worst.max(linalg::max_abs(&gram));
            worst = worst.max(linalg::max_abs(&(w.final_projector() * &m)));
        }
        worst
    }
}

/// Result of [`tracked_completion`].
#[derive(Debug, Clone)]
pub struct TrackedCompletion {
    pub unitaries: Vec<UnitaryOp>,
    pub extension: TrackedBasisExtension,
}

/// Completes every `W_n` to a unitary `U_n` with `U_n P = W_n`, choosing the
/// added vectors by projecting the reference complement onto
/// `(range W_n)^⊥` and renormalizing, Gram–Schmidt in reference order.
///
/// `w_seq[0]` is `W_0` and `reference` must complete it.
pub fn tracked_completion(w_seq: &[PartialIsometry], reference: &UnitaryOp) -> Result<TrackedCompletion> {
    let first = w_seq.first().ok_or(Error::Empty("partial isometry sequence"))?;
    let d = first.d_in();
    if first.d_out() != d || reference.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "tracked completion dimension",
            expected: d,
            found: if first.d_out() != d { first.d_out() } else { reference.dim() },
        });
    }
    let p = first.initial_projector();
    for (index, w) in w_seq.iter().enumerate() {
        if w.d_in() != d || w.d_out() != d {
            return Err(Error::DimensionMismatch {
                context: "tracked completion term",
                expected: d,
                found: w.d_out().max(w.d_in()),
            });
        }
        let deviation = linalg::op_norm(&(w.initial_projector() - &p));
        if deviation > tolerance::VALIDATION {
            return Err(Error::InconsistentProjectors { index, deviation });
        }
    }
    let miss = linalg::op_norm(&(reference.matrix() * &p - first.matrix()));
    if miss > tolerance::VALIDATION {
        return Err(Error::InvalidParameter(format!(
            "reference unitary does not complete W_0 (||U_0 P - W_0|| = {miss:e})"
        )));
    }

    let (initial_range, kernel) = kernel_basis(&p);
    let reference_basis: Vec<CVector> = kernel.iter().map(|f| reference.matrix() * f).collect();

    let mut unitaries = Vec::with_capacity(w_seq.len());
    let mut extensions = Vec::with_capacity(w_seq.len());
    let mut degenerate = Vec::with_capacity(w_seq.len());
    for w in w_seq {
        let q = w.final_projector();
        let span: Vec<CVector> = initial_range.iter().map(|e| w.matrix() * e).collect();
        let mut ext = Vec::with_capacity(kernel.len());
        let mut flags = Vec::with_capacity(kernel.len());
        for psi0 in &reference_basis {
            let mut alpha = psi0 - &q * psi0;
            for _ in 0..2 {
                for prev in span.iter().chain(ext.iter()) {
                    let overlap = prev.dotc(&alpha);
                    alpha.axpy(-overlap, prev, linalg::ONE);
                }
            }
            let n = alpha.norm();
            let lost = n <= tolerance::DEGENERATE_BRANCH;
            if lost {
                let mut all = span.clone();
                all.extend(ext.iter().cloned());
                alpha = linalg::orthonormal_complement(&all, d)
                    .into_iter()
                    .next()
                    .ok_or(Error::RankMismatch {
                        initial: p.nrows() - kernel.len(),
                        final_rank: all.len(),
                    })?;
            } else {
                alpha.unscale_mut(n);
            }
            flags.push(lost);
            ext.push(alpha);
        }
        let mut u = w.matrix().clone();
        for (f, g) in kernel.iter().zip(&ext) {
            u += linalg::outer(g, f);
        }
        unitaries.push(UnitaryOp::new(u)?);
        extensions.push(ext);
        degenerate.push(flags);
    }
    Ok(TrackedCompletion {
        unitaries,
        extension: TrackedBasisExtension {
            reference_basis,
            extensions,
            degenerate,
        },
    })
}

/// Unitaries `U_n` with `U_n P = W_n` from [`tracked_completion`].
pub fn tracked_complete_unitary(w_seq: &[PartialIsometry], reference: &UnitaryOp) -> Result<Vec<UnitaryOp>> {
    tracked_completion(w_seq, reference).map(|t| t.unitaries)
}
