//! Channel sequences and their convergence diagnostics.
//!
//! A [`ChannelSequence`] pairs a limit channel (index 0) with lazily
//! evaluated terms at indices `n >= 1`. Convergence is probed through finite
//! test families, so every defect is a maximum over explicitly listed states,
//! observables and vectors, and every report records which member attained
//! it.

mod defects;
mod generators;
mod report;

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, c64, CVector};
use crate::operators::{DensityOperator, Observable};
use crate::random;

pub use defects::{
    choi_defect, matrix_unit_bound, stabilized_defect, stabilized_vectors, strong_defect, strongstar_defect,
    weak_defect, Defect,
};
pub use generators::{
    channels_from_partial_isometries, complementary_sequence, compose_sequence,
    compression_sequence, compression_term, operator_defects, rotation_form, swap_counterexample, swap_form,
    tensor_sequence, ComplementMode, PartialTraceForm, SwapCounterexample,
};
pub use report::{sweep, ConvergenceReport, ReportRow, CSV_HEADER, SCHEMA_VERSION};

pub type TermFn = Arc<dyn Fn(usize) -> Result<KrausChannel> + Send + Sync>;

/// `{Φ_n}_{n≥0}`: a limit `Φ_0` and terms `Φ_n` for `n >= 1`.
///
/// `indices` is the finite set of term indices that sweeps visit by
/// default; `term` may be defined beyond it.
#[derive(Clone)]
pub struct ChannelSequence {
    limit: KrausChannel,
    term: TermFn,
    indices: Vec<usize>,
    label: String,
}

impl fmt::Debug for ChannelSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChannelSequence")
            .field("label", &self.label)
            .field("d_in", &self.limit.d_in())
            .field("d_out", &self.limit.d_out())
            .field("indices", &self.indices)
            .finish()
    }
}

impl ChannelSequence {
    pub fn new(
        label: impl Into<String>,
        limit: KrausChannel,
        indices: Vec<usize>,
        term: impl Fn(usize) -> Result<KrausChannel> + Send + Sync + 'static,
    ) -> Self {
        Self {
            limit,
            term: Arc::new(term),
            indices,
            label: label.into(),
        }
    }

    /// Sequence whose terms are listed explicitly as `(n, Φ_n)` pairs.
    pub fn from_terms(label: impl Into<String>, limit: KrausChannel, terms: Vec<(usize, KrausChannel)>) -> Result<Self> {
        for (_, ch) in &terms {
            check_dims(&limit, ch)?;
        }
        let indices = terms.iter().map(|(n, _)| *n).collect();
        let table: Arc<Vec<(usize, KrausChannel)>> = Arc::new(terms);
        Ok(Self::new(label, limit, indices, move |n| {
            table
                .iter()
                .find(|(m, _)| *m == n)
                .map(|(_, ch)| ch.clone())
                .ok_or(Error::IndexOutOfRange(n))
        }))
    }

    /// `Φ_n = Φ` for every index.
    pub fn constant(ch: KrausChannel, indices: Vec<usize>) -> Self {
        let term = ch.clone();
        Self::new("constant", ch, indices, move |_| Ok(term.clone()))
    }

    /// `Φ_n`, with `n = 0` returning the limit.
    pub fn term(&self, n: usize) -> Result<KrausChannel> {
        if n == 0 {
            return Ok(self.limit.clone());
        }
        let ch = (self.term)(n)?;
        check_dims(&self.limit, &ch)?;
        Ok(ch)
    }

    pub fn limit(&self) -> &KrausChannel {
        &self.limit
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn d_in(&self) -> usize {
        self.limit.d_in()
    }

    pub fn d_out(&self) -> usize {
        self.limit.d_out()
    }

    pub fn with_indices(mut self, indices: Vec<usize>) -> Self {
        self.indices = indices;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

fn check_dims(limit: &KrausChannel, ch: &KrausChannel) -> Result<()> {
    if ch.d_in() != limit.d_in() {
        return Err(Error::DimensionMismatch {
            context: "sequence term input",
            expected: limit.d_in(),
            found: ch.d_in(),
        });
    }
    if ch.d_out() != limit.d_out() {
        return Err(Error::DimensionMismatch {
            context: "sequence term output",
            expected: limit.d_out(),
            found: ch.d_out(),
        });
    }
    Ok(())
}

pub type Labeled<T> = (String, T);

/// Finite families of test states, observables and vectors.
#[derive(Debug, Clone, Default)]
pub struct TestFamily {
    /// States on the input space.
    pub states: Vec<Labeled<DensityOperator>>,
    /// Observables on the output space.
    pub observables: Vec<Labeled<Observable>>,
    /// Unit vectors on the input space.
    pub vectors: Vec<Labeled<CVector>>,
}

impl TestFamily {
    /// Default family for channels `C^{d_in} → C^{d_out}`:
    ///
    /// - states `|i><i|`, `|i+j>` and `|i+ij>` built from pairs of basis
    ///   vectors (labels `e3`, `p0_2`, `q1_2`), followed by `n_random`
    ///   Haar-random pure states (`h0`, `h1`, ...);
    /// - matrix units `|i><j|` of the output space (`E0_1`);
    /// - basis vectors of the input space and `n_random` Haar-random unit
    ///   vectors.
    pub fn standard(d_in: usize, d_out: usize, n_random: usize, seed: u64) -> Self {
        let mut rng = random::rng(seed);
        Self {
            states: standard_states(d_in, n_random, &mut rng),
            observables: matrix_unit_observables(d_out),
            vectors: standard_vectors(d_in, n_random, &mut rng),
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "{} states, {} observables, {} vectors",
            self.states.len(),
            self.observables.len(),
            self.vectors.len()
        )
    }
}

pub fn standard_states<R: Rng>(d: usize, n_random: usize, rng: &mut R) -> Vec<Labeled<DensityOperator>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..d {
        out.push((format!("e{i}"), DensityOperator::pure(&linalg::basis_vector(d, i)).expect("unit")));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut plus = CVector::zeros(d);
            plus[i] = c64(s, 0.0);
            plus[j] = c64(s, 0.0);
            out.push((format!("p{i}_{j}"), DensityOperator::pure(&plus).expect("unit")));
            plus[j] = c64(0.0, s);
            out.push((format!("q{i}_{j}"), DensityOperator::pure(&plus).expect("unit")));
        }
    }
    for k in 0..n_random {
        out.push((format!("h{k}"), random::pure_state(rng, d)));
    }
    out
}

pub fn matrix_unit_observables(d: usize) -> Vec<Labeled<Observable>> {
    (0..d)
        .flat_map(|i| (0..d).map(move |j| (format!("E{i}_{j}"), Observable::unit(d, i, j))))
        .collect()
}

pub fn standard_vectors<R: Rng>(d: usize, n_random: usize, rng: &mut R) -> Vec<Labeled<CVector>> {
    let mut out: Vec<Labeled<CVector>> = (0..d).map(|i| (format!("e{i}"), linalg::basis_vector(d, i))).collect();
    for k in 0..n_random {
        out.push((format!("h{k}"), random::unit_vector(rng, d)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_zero_is_limit() {
        let seq = ChannelSequence::constant(KrausChannel::identity(2), vec![1, 2]);
        assert_eq!(seq.term(0).unwrap(), KrausChannel::identity(2));
        assert_eq!(seq.term(7).unwrap(), KrausChannel::identity(2));
    }

    #[test]
    fn term_dimension_checked() {
        let seq = ChannelSequence::new("bad", KrausChannel::identity(2), vec![1], |_| Ok(KrausChannel::identity(3)));
        assert!(matches!(seq.term(1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn explicit_terms() {
        let seq = ChannelSequence::from_terms("t", KrausChannel::identity(2), vec![(3, KrausChannel::identity(2))]).unwrap();
        assert_eq!(seq.indices(), &[3]);
        assert!(matches!(seq.term(4), Err(Error::IndexOutOfRange(4))));
        assert!(ChannelSequence::from_terms("t", KrausChannel::identity(2), vec![(1, KrausChannel::identity(3))]).is_err());
    }

    #[test]
    fn standard_family_sizes() {
        let fam = TestFamily::standard(3, 2, 2, 1);
        assert_eq!(fam.states.len(), 3 + 2 * 3 + 2);
        assert_eq!(fam.observables.len(), 4);
        assert_eq!(fam.vectors.len(), 5);
        assert_eq!(fam.states[3].0, "p0_1");
    }
}
