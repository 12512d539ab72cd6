//! Concrete sequences: compressions, partial-trace forms built from
//! partial isometries, the swap counterexample, and combinators.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ChannelSequence;
use crate::channel::{complementary_channel, KrausChannel, StinespringIsometry};
use crate::dilation::{kraus_from_isometry, minimal_kraus};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, CVector};
use crate::operators::{DensityOperator, PartialIsometry};
use crate::tolerance;

/// `Φ_r(ρ) = P_r Φ(ρ) P_r + Tr[(I − P_r)Φ(ρ)] σ` where `P_r` projects onto
/// the first `rank` output basis vectors.
///
/// Kraus family: `P_r A_i` for every `i`, then `√p_k |s_k><m| A_i` over
/// `(i, m, k)` with `m` running over all output basis vectors and `(p_k, s_k)`
/// the nonzero spectrum of `σ`. Operators with `m < rank` are zero, so the
/// family length does not depend on the rank.
pub fn compression_term(phi: &KrausChannel, sigma: &DensityOperator, rank: usize) -> Result<KrausChannel> {
    let d_b = phi.d_out();
    if sigma.dim() != d_b {
        return Err(Error::DimensionMismatch {
            context: "replacement state",
            expected: d_b,
            found: sigma.dim(),
        });
    }
    if rank > d_b {
        return Err(Error::InvalidRank { rank, limit: d_b });
    }
    let eig = linalg::eigh(sigma.matrix());
    let spectrum: Vec<(f64, CVector)> = (0..d_b)
        .rev()
        .filter(|k| eig.values[*k] > tolerance::PURIFY_CUTOFF)
        .map(|k| (eig.values[k], eig.vector(k)))
        .collect();

    let p = CMatrix::from_fn(d_b, d_b, |i, j| if i == j && i < rank { linalg::ONE } else { linalg::ZERO });
    let mut kraus: Vec<CMatrix> = phi.kraus().iter().map(|a| &p * a).collect();
    for a in phi.kraus() {
        for m in 0..d_b {
            for (weight, s) in &spectrum {
                if m < rank {
                    kraus.push(CMatrix::zeros(d_b, phi.d_in()));
                } else {
                    // √p |s><m| A: row m of A placed along s
                    let row = a.row(m);
                    kraus.push(CMatrix::from_fn(d_b, phi.d_in(), |b, x| s[b] * row[x] * weight.sqrt()));
                }
            }
        }
    }
    KrausChannel::new(phi.d_in(), d_b, kraus)
}

/// Term `n` (1-based) is the compression of `Φ` at `ranks[n - 1]`; the limit
/// is `Φ` padded with zero operators to the same family length.
pub fn compression_sequence(phi: &KrausChannel, sigma: &DensityOperator, ranks: &[usize]) -> Result<ChannelSequence> {
    let d_b = phi.d_out();
    for (k, r) in ranks.iter().enumerate() {
        if *r > d_b {
            return Err(Error::InvalidRank { rank: *r, limit: d_b });
        }
        if k > 0 && *r < ranks[k - 1] {
            return Err(Error::InvalidRank {
                rank: *r,
                limit: ranks[k - 1],
            });
        }
    }
    // validates σ and fixes the family length
    let full = compression_term(phi, sigma, d_b)?;
    let limit = phi.padded(full.len())?;
    let phi = phi.clone();
    let sigma = sigma.clone();
    let ranks = ranks.to_vec();
    let indices = (1..=ranks.len()).collect();
    Ok(ChannelSequence::new("compression", limit, indices, move |n| {
        let rank = *ranks.get(n.wrapping_sub(1)).ok_or(Error::IndexOutOfRange(n))?;
        compression_term(&phi, &sigma, rank)
    }))
}

/// Partial isometries of the swap construction on `C^d`.
#[derive(Debug, Clone)]
pub struct SwapCounterexample {
    /// `W_n` for `n = 1..d-1`, stored at position `n - 1`.
    pub terms: Vec<PartialIsometry>,
    /// `P_0`, the projector onto `span{τ_1, ..., τ_{d-1}}`.
    pub limit: PartialIsometry,
    /// `ψ`, the last basis vector.
    pub witness: CVector,
}

impl SwapCounterexample {
    pub fn dim(&self) -> usize {
        self.witness.len()
    }

    /// `τ_j = e_{j-1}` for `j = 1..d-1`.
    pub fn tau(&self, j: usize) -> CVector {
        linalg::basis_vector(self.dim(), j - 1)
    }

    /// `W_n` for `n >= 1`.
    pub fn term(&self, n: usize) -> Result<&PartialIsometry> {
        self.terms.get(n.wrapping_sub(1)).ok_or(Error::IndexOutOfRange(n))
    }

    /// `(‖(W_n − P_0)v‖, ‖(W_n^* − P_0)v‖)`.
    pub fn vector_defects(&self, n: usize, v: &CVector) -> Result<(f64, f64)> {
        Ok(operator_defects(self.term(n)?, &self.limit, v))
    }
}

/// `W_n = Σ_i |φ^n_i><τ_i|` with `φ^n_i = τ_i` for `i ≠ n` and `φ^n_n = ψ`,
/// where `τ_i = e_{i-1}` and `ψ = e_{d-1}`.
pub fn swap_counterexample(d: usize) -> Result<SwapCounterexample> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!("swap construction needs d >= 3, got {d}")));
    }
    let p0 = CMatrix::from_fn(d, d, |i, j| if i == j && i + 1 < d { linalg::ONE } else { linalg::ZERO });
    let terms = (1..d)
        .map(|n| {
            let mut w = p0.clone();
            w[(n - 1, n - 1)] = linalg::ZERO;
            w[(d - 1, n - 1)] = linalg::ONE;
            PartialIsometry::new(w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SwapCounterexample {
        terms,
        limit: PartialIsometry::new(p0)?,
        witness: linalg::basis_vector(d, d - 1),
    })
}

/// `(‖(W − W_0)v‖, ‖(W^* − W_0^*)v‖)`.
pub fn operator_defects(w: &PartialIsometry, w0: &PartialIsometry, v: &CVector) -> (f64, f64) {
    let diff = w.matrix() - w0.matrix();
    ((&diff * v).norm(), (diff.adjoint() * v).norm())
}

pub type PartialIsometryFn = Arc<dyn Fn(usize) -> Result<PartialIsometry> + Send + Sync>;

/// `Φ_n(ρ) = Tr_E W_n V_0 ρ V_0^* W_n^*` with `W_n^* W_n = V_0 V_0^*`.
#[derive(Clone)]
pub struct PartialTraceForm {
    v0: StinespringIsometry,
    w: PartialIsometryFn,
    indices: Vec<usize>,
    label: String,
}

impl std::fmt::Debug for PartialTraceForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PartialTraceForm")
            .field("label", &self.label)
            .field("v0", &self.v0)
            .field("indices", &self.indices)
            .finish()
    }
}

impl PartialTraceForm {
    /// Checks `‖W(n)^*W(n) − V_0V_0^*‖_op <= 1e-10` at every listed index.
    pub fn new(
        label: impl Into<String>,
        v0: StinespringIsometry,
        indices: Vec<usize>,
        w: impl Fn(usize) -> Result<PartialIsometry> + Send + Sync + 'static,
    ) -> Result<Self> {
        let form = Self {
            v0,
            w: Arc::new(w),
            indices,
            label: label.into(),
        };
        for n in &form.indices {
            form.w(*n)?;
        }
        Ok(form)
    }

    pub fn v0(&self) -> &StinespringIsometry {
        &self.v0
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `W(n)`, checked against the range projector of `V_0`.
    pub fn w(&self, n: usize) -> Result<PartialIsometry> {
        let w = (self.w)(n)?;
        check_initial_projector(&w, &self.v0, n)?;
        Ok(w)
    }

    /// Stinespring isometry `W(n) V_0` of term `n`.
    pub fn isometry(&self, n: usize) -> Result<StinespringIsometry> {
        let w = self.w(n)?;
        StinespringIsometry::new(self.v0.d_a(), self.v0.d_b(), self.v0.d_e(), w.matrix() * self.v0.matrix())
    }
}

fn check_initial_projector(w: &PartialIsometry, v0: &StinespringIsometry, n: usize) -> Result<()> {
    let d = v0.d_b() * v0.d_e();
    if w.d_in() != d || w.d_out() != d {
        return Err(Error::DimensionMismatch {
            context: "partial isometry on B⊗E",
            expected: d,
            found: if w.d_in() != d { w.d_in() } else { w.d_out() },
        });
    }
    let deviation = linalg::op_norm(&(w.initial_projector() - v0.range_projector()));
    if deviation > tolerance::VALIDATION {
        return Err(Error::InconsistentProjectors { index: n, deviation });
    }
    Ok(())
}

/// Channel sequence of a partial-trace form. Term `n` is the Kraus channel
/// of `W(n)V_0`; the limit is that of `V_0`. Every index in `ns` is checked
/// up front.
pub fn channels_from_partial_isometries(form: &PartialTraceForm, ns: &[usize]) -> Result<ChannelSequence> {
    for n in ns {
        form.w(*n)?;
    }
    let limit = kraus_from_isometry(form.v0());
    let form = form.clone();
    Ok(ChannelSequence::new(form.label.clone(), limit, ns.to_vec(), move |n| {
        Ok(kraus_from_isometry(&form.isometry(n)?))
    }))
}

fn embedding(d_a: usize, d_b: usize, d_e: usize) -> Result<StinespringIsometry> {
    let d = d_b * d_e;
    if d_a > d {
        return Err(Error::NonEmbeddable {
            required: d_a,
            available: d,
        });
    }
    let v = CMatrix::from_fn(d, d_a, |r, c| if r == c { linalg::ONE } else { linalg::ZERO });
    StinespringIsometry::new(d_a, d_b, d_e, v)
}

/// Form with `V_0` embedding `C^{d_a}` onto the first `d_a` basis vectors
/// of `C^{d_b} ⊗ C^{d_e}` and `W(n) = R(θ_n) P_0`, where `R(θ)` rotates the
/// plane spanned by basis vectors `plane.0` and `plane.1`.
///
/// `‖W(n) − P_0‖_op = 2 sin(θ_n / 2)` whenever `plane.0 < d_a`.
pub fn rotation_form(
    d_a: usize,
    d_b: usize,
    d_e: usize,
    plane: (usize, usize),
    theta: impl Fn(usize) -> f64 + Send + Sync + 'static,
    indices: Vec<usize>,
) -> Result<PartialTraceForm> {
    let v0 = embedding(d_a, d_b, d_e)?;
    let d = d_b * d_e;
    let (i, j) = plane;
    if i >= d || j >= d || i == j {
        return Err(Error::InvalidParameter(format!("rotation plane ({i}, {j}) in dimension {d}")));
    }
    let p0 = v0.range_projector();
    PartialTraceForm::new("rotation", v0, indices, move |n| {
        let (c, s) = (theta(n).cos(), theta(n).sin());
        let mut r = linalg::identity(d);
        r[(i, i)] = c64(c, 0.0);
        r[(j, j)] = c64(c, 0.0);
        r[(i, j)] = c64(-s, 0.0);
        r[(j, i)] = c64(s, 0.0);
        PartialIsometry::new(r * &p0)
    })
}

/// The swap counterexample on `C^{d_b} ⊗ C^{d_e}` with `V_0` embedding
/// `C^{d-1}` onto `span{τ_1, ..., τ_{d-1}}`, `d = d_b d_e`. Terms are
/// indexed `1..d-1`.
pub fn swap_form(d_b: usize, d_e: usize) -> Result<PartialTraceForm> {
    let d = d_b * d_e;
    let swap = swap_counterexample(d)?;
    let v0 = embedding(d - 1, d_b, d_e)?;
    let indices = (1..d).collect();
    PartialTraceForm::new("swap", v0, indices, move |n| Ok(swap.term(n)?.clone()))
}

/// Term `n` is `Φ_n ⊗ Ψ_n`. Indices are those listed by both sequences.
pub fn tensor_sequence(s1: &ChannelSequence, s2: &ChannelSequence) -> ChannelSequence {
    let limit = s1.limit().tensor(s2.limit());
    let indices = s1.indices().iter().copied().filter(|n| s2.indices().contains(n)).collect();
    let (f1, f2) = (s1.clone(), s2.clone());
    let label = format!("{}⊗{}", s1.label(), s2.label());
    ChannelSequence::new(label, limit, indices, move |n| Ok(f1.term(n)?.tensor(&f2.term(n)?)))
}

/// Term `n` is `Ψ_n ∘ Φ_n` for `Φ = s1`, `Ψ = s2`.
pub fn compose_sequence(s1: &ChannelSequence, s2: &ChannelSequence) -> Result<ChannelSequence> {
    let limit = s1.limit().then(s2.limit())?;
    let indices = s1.indices().iter().copied().filter(|n| s2.indices().contains(n)).collect();
    let (f1, f2) = (s1.clone(), s2.clone());
    let label = format!("{}∘{}", s2.label(), s1.label());
    Ok(ChannelSequence::new(label, limit, indices, move |n| f1.term(n)?.then(&f2.term(n)?)))
}

/// How the Kraus family of each term is chosen before complementing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplementMode {
    /// Use each term's family as stored. Families produced from a shared
    /// Stinespring structure (compressions, partial-trace forms) keep their
    /// environment labels aligned across `n`.
    AsGiven,
    /// Recompute a minimal family from the Choi matrix of every term.
    /// Eigenvector phases and ordering are chosen independently per term,
    /// so the resulting sequence need not converge even when the original
    /// does.
    Minimal,
}

/// Sequence of complementary channels, every family padded with zero
/// operators to a common environment dimension.
///
/// With `env_dim = None` the dimension is the largest family length over
/// the limit and the listed indices. A term whose family is longer than the
/// chosen dimension yields [`Error::NonEmbeddable`].
pub fn complementary_sequence(
    seq: &ChannelSequence,
    mode: ComplementMode,
    env_dim: Option<usize>,
) -> Result<ChannelSequence> {
    let family = move |ch: KrausChannel| match mode {
        ComplementMode::AsGiven => ch,
        ComplementMode::Minimal => minimal_kraus(&ch),
    };
    let limit = family(seq.limit().clone());
    let d_e = match env_dim {
        Some(d) => d,
        None => {
            let mut d = limit.len();
            for n in seq.indices() {
                d = d.max(family(seq.term(*n)?).len());
            }
            d
        }
    };
    let limit = complementary_channel(&limit.padded(d_e)?);
    let source = seq.clone();
    let label = format!("complementary({})", seq.label());
    Ok(ChannelSequence::new(label, limit, seq.indices().to_vec(), move |n| {
        Ok(complementary_channel(&family(source.term(n)?).padded(d_e)?))
    }))
}
