//! Channels in Kraus and Stinespring form, their Schrödinger and Heisenberg
//! actions, complementary channels and Choi matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{self, CMatrix, Factor};
use crate::operators::{DensityOperator, Observable};
use crate::tolerance;

/// A trace-preserving family `{A_i}` of `d_out x d_in` matrices with
/// `Σ A_i^* A_i = I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKraus", into = "RawKraus")]
pub struct KrausChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct RawKraus {
    d_in: usize,
    d_out: usize,
    #[serde(with = "json::cmatrix_list")]
    kraus: Vec<CMatrix>,
}

impl TryFrom<RawKraus> for KrausChannel {
    type Error = Error;
    fn try_from(raw: RawKraus) -> Result<Self> {
        KrausChannel::new(raw.d_in, raw.d_out, raw.kraus)
    }
}

impl From<KrausChannel> for RawKraus {
    fn from(ch: KrausChannel) -> Self {
        RawKraus {
            d_in: ch.d_in,
            d_out: ch.d_out,
            kraus: ch.kraus,
        }
    }
}

impl KrausChannel {
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::ZeroDimension("channel"));
        }
        if kraus.is_empty() {
            return Err(Error::Empty("Kraus family"));
        }
        for a in &kraus {
            if a.nrows() != d_out {
                return Err(Error::DimensionMismatch {
                    context: "Kraus operator rows",
                    expected: d_out,
                    found: a.nrows(),
                });
            }
            if a.ncols() != d_in {
                return Err(Error::DimensionMismatch {
                    context: "Kraus operator columns",
                    expected: d_in,
                    found: a.ncols(),
                });
            }
            if !linalg::is_finite(a) {
                return Err(Error::NonFinite);
            }
        }
        let ch = Self { d_in, d_out, kraus };
        let deviation = ch.completeness_deviation();
        if deviation > tolerance::VALIDATION {
            return Err(Error::NotTracePreserving(deviation));
        }
        Ok(ch)
    }

    /// Identity channel on `C^d`.
    pub fn identity(d: usize) -> Self {
        Self {
            d_in: d,
            d_out: d,
            kraus: vec![linalg::identity(d)],
        }
    }

    /// Unitary channel `ρ ↦ UρU^*`.
    pub fn unitary(u: &crate::operators::UnitaryOp) -> Self {
        Self {
            d_in: u.dim(),
            d_out: u.dim(),
            kraus: vec![u.matrix().clone()],
        }
    }

    /// `||Σ A_i^* A_i - I||_op`.
    pub fn completeness_deviation(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.d_in, self.d_in), |acc, a| acc + a.adjoint() * a);
        linalg::op_norm(&(sum - linalg::identity(self.d_in)))
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// The channel's linear extension to an arbitrary `d_in x d_in` matrix.
    pub fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.d_out, self.d_out), |acc, a| acc + a * x * a.adjoint())
    }

    /// Heisenberg-picture action on an arbitrary `d_out x d_out` matrix.
    pub fn dual_matrix(&self, b: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.d_in, self.d_in), |acc, a| acc + a.adjoint() * b * a)
    }

    /// Same action with zero operators appended until the family has
    /// `len` members.
    pub fn padded(&self, len: usize) -> Result<Self> {
        if len < self.kraus.len() {
            return Err(Error::NonEmbeddable {
                required: self.kraus.len(),
                available: len,
            });
        }
        let mut kraus = self.kraus.clone();
        kraus.resize(len, CMatrix::zeros(self.d_out, self.d_in));
        Ok(Self {
            d_in: self.d_in,
            d_out: self.d_out,
            kraus,
        })
    }

    /// Drops Kraus operators whose largest entry is at most `tol`. At least
    /// one operator is always retained.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut kraus: Vec<CMatrix> = self
            .kraus
            .iter()
            .filter(|a| linalg::max_abs(a) > tol)
            .cloned()
            .collect();
        if kraus.is_empty() {
            kraus.push(self.kraus[0].clone());
        }
        Self {
            d_in: self.d_in,
            d_out: self.d_out,
            kraus,
        }
    }

    /// Choi matrix `Σ_ij Φ(|i><j|) ⊗ |i><j|` on `C^{d_out} ⊗ C^{d_in}`.
    pub fn choi(&self) -> CMatrix {
        let (d_in, d_out) = (self.d_in, self.d_out);
        let mut j = CMatrix::zeros(d_out * d_in, d_out * d_in);
        for a in &self.kraus {
            // (A ⊗ I)|Ω> has entry A_{b,a} at flat index b * d_in + a
            let omega = linalg::CVector::from_fn(d_out * d_in, |idx, _| a[(idx / d_in, idx % d_in)]);
            j += linalg::outer(&omega, &omega);
        }
        j
    }

    /// Kraus family of `self ⊗ other`, operator `(i, j)` at index
    /// `i * other.len() + j`.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| linalg::tensor(a, b)))
            .collect();
        KrausChannel {
            d_in: self.d_in * other.d_in,
            d_out: self.d_out * other.d_out,
            kraus,
        }
    }

    /// Kraus family of `then ∘ self`, operator `B_j A_i` at index
    /// `i * then.len() + j`.
    pub fn then(&self, then: &KrausChannel) -> Result<KrausChannel> {
        if self.d_out != then.d_in {
            return Err(Error::DimensionMismatch {
                context: "channel composition",
                expected: self.d_out,
                found: then.d_in,
            });
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| then.kraus.iter().map(move |b| b * a))
            .collect();
        Ok(KrausChannel {
            d_in: self.d_in,
            d_out: then.d_out,
            kraus,
        })
    }
}

/// Largest entrywise difference between the actions of two channels on the
/// matrix units `|i><j|` of the input space.
pub fn action_deviation(a: &KrausChannel, b: &KrausChannel) -> f64 {
    if a.d_in != b.d_in || a.d_out != b.d_out {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for i in 0..a.d_in {
        for j in 0..a.d_in {
            let unit = linalg::matrix_unit(a.d_in, a.d_in, i, j);
            worst = worst.max(linalg::max_abs(&(a.apply_matrix(&unit) - b.apply_matrix(&unit))));
        }
    }
    worst
}

/// An isometry `V: C^{d_A} → C^{d_B} ⊗ C^{d_E}` with rows flattened as
/// `b * d_E + e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIsometry", into = "RawIsometry")]
pub struct StinespringIsometry {
    d_a: usize,
    d_b: usize,
    d_e: usize,
    v: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct RawIsometry {
    d_a: usize,
    d_b: usize,
    d_e: usize,
    #[serde(with = "json::cmatrix")]
    v: CMatrix,
}

impl TryFrom<RawIsometry> for StinespringIsometry {
    type Error = Error;
    fn try_from(raw: RawIsometry) -> Result<Self> {
        StinespringIsometry::new(raw.d_a, raw.d_b, raw.d_e, raw.v)
    }
}

impl From<StinespringIsometry> for RawIsometry {
    fn from(iso: StinespringIsometry) -> Self {
        RawIsometry {
            d_a: iso.d_a,
            d_b: iso.d_b,
            d_e: iso.d_e,
            v: iso.v,
        }
    }
}

impl StinespringIsometry {
    pub fn new(d_a: usize, d_b: usize, d_e: usize, v: CMatrix) -> Result<Self> {
        if d_a == 0 || d_b == 0 || d_e == 0 {
            return Err(Error::ZeroDimension("Stinespring isometry"));
        }
        if v.nrows() != d_b * d_e {
            return Err(Error::DimensionMismatch {
                context: "isometry rows (d_B * d_E)",
                expected: d_b * d_e,
                found: v.nrows(),
            });
        }
        if v.ncols() != d_a {
            return Err(Error::DimensionMismatch {
                context: "isometry columns (d_A)",
                expected: d_a,
                found: v.ncols(),
            });
        }
        if !linalg::is_finite(&v) {
            return Err(Error::NonFinite);
        }
        let deviation = linalg::op_norm(&(v.adjoint() * &v - linalg::identity(d_a)));
        if deviation > tolerance::VALIDATION {
            return Err(Error::NotIsometry(deviation));
        }
        Ok(Self { d_a, d_b, d_e, v })
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_e(&self) -> usize {
        self.d_e
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.v
    }

    /// Range projector `VV^*` on `C^{d_B} ⊗ C^{d_E}`.
    pub fn range_projector(&self) -> CMatrix {
        &self.v * self.v.adjoint()
    }
}

fn require_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// `Σ_i A_i ρ A_i^*`.
pub fn apply_kraus(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    require_dim("apply_kraus input", ch.d_in, rho.dim())?;
    Ok(DensityOperator::from_trusted(ch.apply_matrix(rho.matrix())))
}

/// `Tr_E VρV^*`.
pub fn apply_stinespring(v: &StinespringIsometry, rho: &DensityOperator) -> Result<DensityOperator> {
    require_dim("apply_stinespring input", v.d_a, rho.dim())?;
    let full = &v.v * rho.matrix() * v.v.adjoint();
    Ok(DensityOperator::from_trusted(linalg::partial_trace(
        &full,
        Factor::Second,
        v.d_b,
        v.d_e,
    )?))
}

/// Heisenberg picture `Σ_i A_i^* B A_i`.
pub fn dual_apply(ch: &KrausChannel, b: &Observable) -> Result<Observable> {
    require_dim("dual_apply observable", ch.d_out, b.dim())?;
    Observable::new(ch.dual_matrix(b.matrix()))
}

/// Complementary output `Tr_B VρV^*` on the environment.
pub fn complementary(v: &StinespringIsometry, rho: &DensityOperator) -> Result<DensityOperator> {
    require_dim("complementary input", v.d_a, rho.dim())?;
    let full = &v.v * rho.matrix() * v.v.adjoint();
    Ok(DensityOperator::from_trusted(linalg::partial_trace(
        &full,
        Factor::First,
        v.d_b,
        v.d_e,
    )?))
}

/// Kraus family of the complementary channel of the isometry built from
/// `ch`: operator `b` has entries `(e, a) ↦ (A_e)_{b,a}`.
pub fn complementary_channel(ch: &KrausChannel) -> KrausChannel {
    let d_e = ch.len();
    let kraus = (0..ch.d_out)
        .map(|b| CMatrix::from_fn(d_e, ch.d_in, |e, a| ch.kraus[e][(b, a)]))
        .collect();
    KrausChannel {
        d_in: ch.d_in,
        d_out: d_e,
        kraus,
    }
}
