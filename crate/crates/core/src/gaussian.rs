//! Bosonic Gaussian states and channels at the level of their parameters.
//!
//! Conventions: a state on `s` modes has characteristic function
//! `φ(z) = exp(i m·z − ½ zᵀσz)` for `z ∈ R^{2s}`; validity is
//! `σ ± iΔ ≥ 0` with `Δ` block diagonal in `[[0, 1], [−1, 0]]`, so the vacuum
//! has `σ = I`. A channel `(K, ℓ, α)` from `s_in` to `s_out` modes acts by
//! `m ↦ mK + ℓ`, `σ ↦ α + KᵀσK`, with `K` of shape `2s_in x 2s_out`, and is
//! valid when `α ± i(Δ_out − KᵀΔ_in K) ≥ 0`. A coherent state `|η>` has mean
//! `m = 2(Re η, Im η)`, which makes `|<a|b>|² = exp(−|a − b|²)`.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{self, c64, CMatrix};
use crate::tolerance;

pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

/// Phase space `R^{2s}` with its symplectic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticSpace {
    pub s: usize,
}

impl SymplecticSpace {
    pub fn new(s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::ZeroDimension("symplectic space"));
        }
        Ok(Self { s })
    }

    pub fn dim(&self) -> usize {
        2 * self.s
    }

    /// Block-diagonal `Δ` with blocks `[[0, 1], [−1, 0]]`.
    pub fn delta(&self) -> RMatrix {
        delta(self.s)
    }
}

pub fn delta(s: usize) -> RMatrix {
    let mut d = RMatrix::zeros(2 * s, 2 * s);
    for k in 0..s {
        d[(2 * k, 2 * k + 1)] = 1.0;
        d[(2 * k + 1, 2 * k)] = -1.0;
    }
    d
}

fn symmetry_error(x: &RMatrix) -> f64 {
    (x - x.transpose()).amax()
}

fn all_finite<'a>(mut values: impl Iterator<Item = &'a f64>) -> bool {
    values.all(|v| v.is_finite())
}

fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
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

fn check_shape(context: &'static str, x: &RMatrix, rows: usize, cols: usize) -> Result<()> {
    check_len(context, rows, x.nrows())?;
    check_len(context, cols, x.ncols())
}

/// Smallest eigenvalues of `x + iy` and `x − iy` for real `x` and `y`.
fn plus_minus_min_eig(x: &RMatrix, y: &RMatrix) -> (f64, f64) {
    let build = |sign: f64| {
        let m = CMatrix::from_fn(x.nrows(), x.ncols(), |i, j| c64(x[(i, j)], sign * y[(i, j)]));
        linalg::eigh(&linalg::hermitian_part(&m)).values[0]
    };
    (build(1.0), build(-1.0))
}

/// Outcome of a positivity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub valid: bool,
    /// Smallest eigenvalue of the `+i` matrix.
    pub min_eig_plus: f64,
    /// Smallest eigenvalue of the `−i` matrix.
    pub min_eig_minus: f64,
    /// Largest entry of `X − Xᵀ` for the covariance-like matrix `X`.
    pub symmetry_error: f64,
}

impl Diagnostics {
    fn new(min_eig_plus: f64, min_eig_minus: f64, symmetry_error: f64) -> Self {
        Self {
            valid: min_eig_plus.min(min_eig_minus) >= tolerance::PSD_FLOOR
                && symmetry_error <= tolerance::HERMITIAN,
            min_eig_plus,
            min_eig_minus,
            symmetry_error,
        }
    }

    pub fn min_eig(&self) -> f64 {
        self.min_eig_plus.min(self.min_eig_minus)
    }

    fn into_result(self) -> Result<()> {
        if self.symmetry_error > tolerance::HERMITIAN {
            Err(Error::NotSymmetric(self.symmetry_error))
        } else if !self.valid {
            Err(Error::NotPositive(self.min_eig()))
        } else {
            Ok(())
        }
    }
}

/// Gaussian state `(m, σ)` on `s` modes.
///
/// Construction only checks shapes; [`validate_state`] checks the
/// uncertainty relation and [`GaussianState::valid`] does both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct GaussianState {
    space: SymplecticSpace,
    m: RVector,
    sigma: RMatrix,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    s: usize,
    #[serde(with = "json::rvector")]
    m: RVector,
    #[serde(with = "json::rmatrix")]
    sigma: RMatrix,
}

impl TryFrom<RawState> for GaussianState {
    type Error = Error;
    fn try_from(raw: RawState) -> Result<Self> {
        GaussianState::new(raw.s, raw.m, raw.sigma)
    }
}

impl From<GaussianState> for RawState {
    fn from(st: GaussianState) -> Self {
        RawState {
            s: st.space.s,
            m: st.m,
            sigma: st.sigma,
        }
    }
}

impl GaussianState {
    pub fn new(s: usize, m: RVector, sigma: RMatrix) -> Result<Self> {
        let space = SymplecticSpace::new(s)?;
        check_len("state mean", space.dim(), m.len())?;
        check_shape("state covariance", &sigma, space.dim(), space.dim())?;
        if !all_finite(m.iter().chain(sigma.iter())) {
            return Err(Error::NonFinite);
        }
        Ok(Self { space, m, sigma })
    }

    /// [`GaussianState::new`] followed by [`validate_state`].
    pub fn valid(s: usize, m: RVector, sigma: RMatrix) -> Result<Self> {
        let st = Self::new(s, m, sigma)?;
        validate_state(&st).into_result()?;
        Ok(st)
    }

    pub fn vacuum(s: usize) -> Result<Self> {
        Self::new(s, RVector::zeros(2 * s), RMatrix::identity(2 * s, 2 * s))
    }

    /// Single-mode coherent state `|η>`: `m = 2(Re η, Im η)`, `σ = I`.
    pub fn coherent(eta: Complex64) -> Result<Self> {
        Self::new(1, RVector::from_vec(vec![2.0 * eta.re, 2.0 * eta.im]), RMatrix::identity(2, 2))
    }

    pub fn space(&self) -> SymplecticSpace {
        self.space
    }

    pub fn modes(&self) -> usize {
        self.space.s
    }

    pub fn mean(&self) -> &RVector {
        &self.m
    }

    pub fn covariance(&self) -> &RMatrix {
        &self.sigma
    }
}

/// Gaussian channel `(K, ℓ, α)` from `s_in` to `s_out` modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct GaussianChannel {
    s_in: usize,
    s_out: usize,
    k: RMatrix,
    ell: RVector,
    alpha: RMatrix,
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    s_in: usize,
    s_out: usize,
    #[serde(rename = "K", with = "json::rmatrix")]
    k: RMatrix,
    #[serde(with = "json::rvector")]
    ell: RVector,
    #[serde(with = "json::rmatrix")]
    alpha: RMatrix,
}

impl TryFrom<RawChannel> for GaussianChannel {
    type Error = Error;
    fn try_from(raw: RawChannel) -> Result<Self> {
        GaussianChannel::new(raw.s_in, raw.s_out, raw.k, raw.ell, raw.alpha)
    }
}

impl From<GaussianChannel> for RawChannel {
    fn from(ch: GaussianChannel) -> Self {
        RawChannel {
            s_in: ch.s_in,
            s_out: ch.s_out,
            k: ch.k,
            ell: ch.ell,
            alpha: ch.alpha,
        }
    }
}

impl GaussianChannel {
    /// Shape checks only; see [`validate_channel`].
    pub fn new(s_in: usize, s_out: usize, k: RMatrix, ell: RVector, alpha: RMatrix) -> Result<Self> {
        let (a, b) = (SymplecticSpace::new(s_in)?, SymplecticSpace::new(s_out)?);
        check_shape("channel K", &k, a.dim(), b.dim())?;
        check_len("channel ell", b.dim(), ell.len())?;
        check_shape("channel alpha", &alpha, b.dim(), b.dim())?;
        if !all_finite(k.iter().chain(ell.iter()).chain(alpha.iter())) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            s_in,
            s_out,
            k,
            ell,
            alpha,
        })
    }

    /// [`GaussianChannel::new`] followed by [`validate_channel`].
    pub fn valid(s_in: usize, s_out: usize, k: RMatrix, ell: RVector, alpha: RMatrix) -> Result<Self> {
        let ch = Self::new(s_in, s_out, k, ell, alpha)?;
        validate_channel(&ch).into_result()?;
        Ok(ch)
    }

    pub fn identity(s: usize) -> Result<Self> {
        let d = 2 * s;
        Self::new(s, s, RMatrix::identity(d, d), RVector::zeros(d), RMatrix::zeros(d, d))
    }

    pub fn s_in(&self) -> usize {
        self.s_in
    }

    pub fn s_out(&self) -> usize {
        self.s_out
    }

    pub fn k(&self) -> &RMatrix {
        &self.k
    }

    pub fn ell(&self) -> &RVector {
        &self.ell
    }

    pub fn alpha(&self) -> &RMatrix {
        &self.alpha
    }
}

/// Checks `σ ± iΔ ≥ 0` and the symmetry of `σ`.
pub fn validate_state(st: &GaussianState) -> Diagnostics {
    let (plus, minus) = plus_minus_min_eig(&st.sigma, &st.space.delta());
    Diagnostics::new(plus, minus, symmetry_error(&st.sigma))
}

/// Checks `α ± i(Δ_out − KᵀΔ_in K) ≥ 0` and the symmetry of `α`.
pub fn validate_channel(ch: &GaussianChannel) -> Diagnostics {
    let bracket = delta(ch.s_out) - ch.k.transpose() * delta(ch.s_in) * &ch.k;
    let (plus, minus) = plus_minus_min_eig(&ch.alpha, &bracket);
    Diagnostics::new(plus, minus, symmetry_error(&ch.alpha))
}

/// Output state `(mK + ℓ, α + KᵀσK)`.
pub fn apply_gaussian(ch: &GaussianChannel, st: &GaussianState) -> Result<GaussianState> {
    check_len("Gaussian channel input modes", ch.s_in, st.modes())?;
    validate_channel(ch).into_result()?;
    validate_state(st).into_result()?;
    let m = ch.k.tr_mul(&st.m) + &ch.ell;
    let sigma = &ch.alpha + ch.k.transpose() * &st.sigma * &ch.k;
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    GaussianState::new(ch.s_out, m, sigma)
}

/// `exp(i m·z − ½ zᵀσz)`.
pub fn char_fn(st: &GaussianState, z: &RVector) -> Result<Complex64> {
    check_len("characteristic function argument", st.space.dim(), z.len())?;
    let phase = st.m.dot(z);
    let damping = -0.5 * z.dot(&(&st.sigma * z));
    Ok(Complex64::from_polar(damping.exp(), phase))
}

/// `(Kz, exp(iℓ·z − ½ zᵀαz))`.
pub fn dual_weyl_symbol(ch: &GaussianChannel, z: &RVector) -> Result<(RVector, Complex64)> {
    check_len("dual Weyl argument", 2 * ch.s_out, z.len())?;
    let damping = -0.5 * z.dot(&(&ch.alpha * z));
    Ok((&ch.k * z, Complex64::from_polar(damping.exp(), ch.ell.dot(z))))
}

/// Parameters of `second ∘ first`: `K = K₁K₂`, `ℓ = ℓ₁K₂ + ℓ₂`,
/// `α = α₂ + K₂ᵀα₁K₂`.
pub fn compose(first: &GaussianChannel, second: &GaussianChannel) -> Result<GaussianChannel> {
    check_len("Gaussian composition", first.s_out, second.s_in)?;
    let k = &first.k * &second.k;
    let ell = second.k.tr_mul(&first.ell) + &second.ell;
    let alpha = &second.alpha + second.k.transpose() * &first.alpha * &second.k;
    let alpha = (&alpha + alpha.transpose()) * 0.5;
    GaussianChannel::new(first.s_in, second.s_out, k, ell, alpha)
}

/// Quantum-limited attenuator: `K = kI`, `ℓ = 0`, `α = (1 − k²)I`.
pub fn attenuator(k: f64) -> Result<GaussianChannel> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::InvalidParameter(format!("attenuator coefficient {k} outside (0, 1]")));
    }
    GaussianChannel::new(
        1,
        1,
        RMatrix::identity(2, 2) * k,
        RVector::zeros(2),
        RMatrix::identity(2, 2) * (1.0 - k * k),
    )
}

/// `Tr ρ₁ρ₂ = 2^s / sqrt(det(σ₁ + σ₂)) · exp(−½ δᵀ(σ₁ + σ₂)⁻¹δ)`, `δ = m₁ − m₂`.
pub fn overlap(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    check_len("overlap modes", a.modes(), b.modes())?;
    let sum = &a.sigma + &b.sigma;
    let d = &a.m - &b.m;
    let chol = sum
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositive(sum.symmetric_eigenvalues().min()))?;
    let quad = d.dot(&chol.solve(&d));
    let det = chol.determinant();
    Ok(2f64.powi(a.modes() as i32) / det.sqrt() * (-0.5 * quad).exp())
}

/// Trace distance `2 sqrt(1 − exp(−(k − k')²|η|²))` between the pure
/// outputs `|kη>` and `|k'η>` of two attenuators.
pub fn attenuator_output_distance(k: f64, k_prime: f64, eta: Complex64) -> f64 {
    let gap = (k - k_prime).powi(2) * eta.norm_sqr();
    2.0 * (-(-gap).exp_m1()).sqrt()
}

pub type GaussianTermFn = Arc<dyn Fn(usize) -> Result<GaussianChannel> + Send + Sync>;

/// `{Φ_n}` of Gaussian channels sharing input and output modes.
#[derive(Clone)]
pub struct GaussianChannelSequence {
    limit: GaussianChannel,
    term: GaussianTermFn,
    label: String,
}

impl std::fmt::Debug for GaussianChannelSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaussianChannelSequence")
            .field("label", &self.label)
            .field("limit", &self.limit)
            .finish()
    }
}

impl GaussianChannelSequence {
    pub fn new(
        label: impl Into<String>,
        limit: GaussianChannel,
        term: impl Fn(usize) -> Result<GaussianChannel> + Send + Sync + 'static,
    ) -> Self {
        Self {
            limit,
            term: Arc::new(term),
            label: label.into(),
        }
    }

    pub fn constant(ch: GaussianChannel) -> Self {
        let c = ch.clone();
        Self::new("constant", ch, move |_| Ok(c.clone()))
    }

    /// Attenuators `k(n)` converging to `k(0)`.
    pub fn attenuators(k: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let limit = attenuator(k(0))?;
        Ok(Self::new("attenuator", limit, move |n| attenuator(k(n))))
    }

    pub fn limit(&self) -> &GaussianChannel {
        &self.limit
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Φ_n`, with `n = 0` returning the limit.
    pub fn term(&self, n: usize) -> Result<GaussianChannel> {
        if n == 0 {
            return Ok(self.limit.clone());
        }
        let ch = (self.term)(n)?;
        check_len("Gaussian sequence input modes", self.limit.s_in, ch.s_in)?;
        check_len("Gaussian sequence output modes", self.limit.s_out, ch.s_out)?;
        Ok(ch)
    }
}

/// Points of `{−2, −1, 0, 1, 2}^dim` in lexicographic order, keeping every
/// `stride`-th point so that at most `max_points` remain.
pub fn z_grid(dim: usize, max_points: usize) -> Vec<RVector> {
    const VALUES: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let total = 5usize.saturating_pow(dim as u32);
    let stride = total.div_ceil(max_points.max(1)).max(1);
    (0..total)
        .step_by(stride)
        .map(|mut idx| {
            let mut z = RVector::zeros(dim);
            for k in (0..dim).rev() {
                z[k] = VALUES[idx % 5];
                idx /= 5;
            }
            z
        })
        .collect()
}

/// Default grid size.
pub const DEFAULT_GRID_POINTS: usize = 625;

/// Test states for [`param_convergence_check`]: vacuum, a displaced vacuum
/// with unit first mean, and a thermal state `σ = 3I`.
pub fn standard_test_states(s: usize) -> Result<Vec<(String, GaussianState)>> {
    let d = 2 * s;
    let mut shifted = RVector::zeros(d);
    shifted[0] = 1.0;
    Ok(vec![
        ("vacuum".to_string(), GaussianState::vacuum(s)?),
        ("displaced".to_string(), GaussianState::new(s, shifted, RMatrix::identity(d, d))?),
        ("thermal".to_string(), GaussianState::new(s, RVector::zeros(d), RMatrix::identity(d, d) * 3.0)?),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRow {
    pub n: usize,
    pub k_dev: f64,
    pub ell_dev: f64,
    pub alpha_dev: f64,
    /// Largest of the three parameter deviations.
    pub param_dev: f64,
    /// `max |φ_{Φ_n(ρ)}(z) − φ_{Φ_0(ρ)}(z)|` over test states and grid.
    pub charfn_dev: f64,
    pub charfn_witness: String,
    pub within_eps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamReport {
    pub schema: String,
    pub label: String,
    pub eps: f64,
    pub grid_points: usize,
    pub test_states: Vec<String>,
    pub rows: Vec<ParamRow>,
}

pub const PARAM_CSV_HEADER: &str = "n,k_dev,ell_dev,alpha_dev,param_dev,charfn_dev,charfn_witness,within_eps";

impl ParamReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(PARAM_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{}",
                r.n, r.k_dev, r.ell_dev, r.alpha_dev, r.param_dev, r.charfn_dev, r.charfn_witness, r.within_eps
            );
        }
        out
    }

    /// Largest `charfn_dev / param_dev` over rows with nonzero parameter
    /// deviation.
    pub fn max_ratio(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.param_dev > 0.0)
            .map(|r| r.charfn_dev / r.param_dev)
            .fold(0.0, f64::max)
    }
}

fn max_entry(x: &RMatrix) -> f64 {
    x.amax()
}

/// Per index: max-entry deviations of `K`, `ℓ`, `α` from the limit and the
/// largest characteristic-function deviation of the outputs on the grid.
/// A row is `within_eps` when both deviations are at most `eps`.
pub fn param_convergence_check(
    seq: &GaussianChannelSequence,
    ns: &[usize],
    eps: f64,
    states: &[(String, GaussianState)],
    grid: &[RVector],
) -> Result<ParamReport> {
    if states.is_empty() {
        return Err(Error::Empty("Gaussian test states"));
    }
    if grid.is_empty() {
        return Err(Error::Empty("z-grid"));
    }
    let limit = seq.limit();
    let limit_outputs = states
        .iter()
        .map(|(_, st)| apply_gaussian(limit, st))
        .collect::<Result<Vec<_>>>()?;
    let rows = ns
        .par_iter()
        .map(|&n| {
            let ch = seq.term(n)?;
            let k_dev = max_entry(&(&ch.k - &limit.k));
            let ell_dev = (&ch.ell - &limit.ell).amax();
            let alpha_dev = max_entry(&(&ch.alpha - &limit.alpha));
            let param_dev = k_dev.max(ell_dev).max(alpha_dev);
            let mut charfn_dev: f64 = 0.0;
            let mut witness = String::new();
            for ((label, st), out0) in states.iter().zip(&limit_outputs) {
                let out = apply_gaussian(&ch, st)?;
                for (zi, z) in grid.iter().enumerate() {
                    let dev = (char_fn(&out, z)? - char_fn(out0, z)?).norm();
                    if dev > charfn_dev || witness.is_empty() {
                        charfn_dev = charfn_dev.max(dev);
                        witness = format!("{label}|z{zi}");
                    }
                }
            }
            Ok(ParamRow {
                n,
                k_dev,
                ell_dev,
                alpha_dev,
                param_dev,
                charfn_dev,
                charfn_witness: witness,
                within_eps: param_dev <= eps && charfn_dev <= eps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParamReport {
        schema: crate::sequences::SCHEMA_VERSION.to_string(),
        label: seq.label().to_string(),
        eps,
        grid_points: grid.len(),
        test_states: states.iter().map(|(l, _)| l.clone()).collect(),
        rows,
    })
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> RMatrix {
    RMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_psd<R: Rng>(rng: &mut R, d: usize, scale: f64) -> RMatrix {
    let g = gaussian_matrix(rng, d, d) * scale;
    &g * g.transpose()
}

/// Random symplectic matrix `exp(ΔH)` for a small random symmetric `H`.
pub fn random_symplectic<R: Rng>(rng: &mut R, s: usize) -> RMatrix {
    let g = gaussian_matrix(rng, 2 * s, 2 * s) * 0.3;
    let h = (&g + g.transpose()) * 0.5;
    (delta(s) * h).exp()
}

/// Random valid state `Sᵀ(I + P)S + ` random mean, `S` symplectic, `P ≥ 0`.
pub fn random_state<R: Rng>(rng: &mut R, s: usize) -> GaussianState {
    let d = 2 * s;
    let sym = random_symplectic(rng, s);
    let inner = RMatrix::identity(d, d) + random_psd(rng, d, 0.4);
    let sigma = sym.transpose() * inner * &sym;
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    let m = RVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    GaussianState::new(s, m, sigma).expect("shapes agree")
}

/// Random valid channel: `α = |i(Δ_out − KᵀΔ_in K)| + P` with `P ≥ 0`.
pub fn random_channel<R: Rng>(rng: &mut R, s_in: usize, s_out: usize) -> GaussianChannel {
    let (da, db) = (2 * s_in, 2 * s_out);
    let k = gaussian_matrix(rng, da, db) * 0.7;
    let ell = RVector::from_fn(db, |_, _| rng.sample::<f64, _>(StandardNormal));
    let c = delta(s_out) - k.transpose() * delta(s_in) * &k;
    // |iC| = sqrt(CᵀC) for real antisymmetric C
    let ctc = c.transpose() * &c;
    let eig = ((&ctc + ctc.transpose()) * 0.5).symmetric_eigen();
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let abs = &eig.eigenvectors * RMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
    let alpha = abs + random_psd(rng, db, 0.3);
    let alpha = (&alpha + alpha.transpose()) * 0.5;
    GaussianChannel::new(s_in, s_out, k, ell, alpha).expect("shapes agree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use approx::assert_abs_diff_eq;

    fn single(s: f64) -> GaussianState {
        GaussianState::new(1, RVector::zeros(2), RMatrix::identity(2, 2) * s).unwrap()
    }

    #[test]
    fn delta_is_symplectic_form() {
        let d = delta(3);
        assert_eq!(&d + d.transpose(), RMatrix::zeros(6, 6));
        assert_eq!(&d * &d, -RMatrix::identity(6, 6));
    }

    #[test]
    fn state_validation_examples() {
        let vac = validate_state(&GaussianState::vacuum(1).unwrap());
        assert!(vac.valid);
        assert_abs_diff_eq!(vac.min_eig_plus, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vac.min_eig_minus, 0.0, epsilon = 1e-12);
        let half = validate_state(&single(0.5));
        assert!(!half.valid);
        assert_abs_diff_eq!(half.min_eig(), -0.5, epsilon = 1e-12);
        let three = validate_state(&single(3.0));
        assert!(three.valid);
        assert_abs_diff_eq!(three.min_eig(), 2.0, epsilon = 1e-12);
        assert!(GaussianState::valid(1, RVector::zeros(2), RMatrix::identity(2, 2) * 0.5).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            GaussianState::new(1, RVector::zeros(3), RMatrix::identity(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(GaussianChannel::new(1, 2, RMatrix::zeros(2, 2), RVector::zeros(4), RMatrix::zeros(4, 4)).is_err());
        assert!(char_fn(&GaussianState::vacuum(1).unwrap(), &RVector::zeros(4)).is_err());
    }

    #[test]
    fn asymmetric_covariance_rejected() {
        let mut sigma = RMatrix::identity(2, 2) * 2.0;
        sigma[(0, 1)] = 0.1;
        let st = GaussianState::new(1, RVector::zeros(2), sigma).unwrap();
        let diag = validate_state(&st);
        assert!(!diag.valid);
        assert_abs_diff_eq!(diag.symmetry_error, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn channel_validation_examples() {
        assert!(validate_channel(&GaussianChannel::identity(2).unwrap()).valid);
        for k in [0.1, 0.5, 0.9] {
            let d = validate_channel(&attenuator(k).unwrap());
            assert!(d.valid);
            // α ± i(1 − k²)Δ has eigenvalues (1 − k²)(1 ± 1)
            assert_abs_diff_eq!(d.min_eig(), 0.0, epsilon = 1e-12);
            let bare = GaussianChannel::new(1, 1, RMatrix::identity(2, 2) * k, RVector::zeros(2), RMatrix::zeros(2, 2)).unwrap();
            let d = validate_channel(&bare);
            assert!(!d.valid);
            assert_abs_diff_eq!(d.min_eig(), -(1.0 - k * k), epsilon = 1e-12);
        }
    }

    #[test]
    fn attenuator_examples() {
        assert!(attenuator(0.0).is_err());
        assert!(attenuator(1.2).is_err());
        assert_eq!(attenuator(1.0).unwrap(), GaussianChannel::identity(1).unwrap());
        let vac = GaussianState::vacuum(1).unwrap();
        let out = apply_gaussian(&attenuator(0.5).unwrap(), &vac).unwrap();
        assert!((out.covariance() - vac.covariance()).amax() < 1e-15);
        let eta = c64(0.7, -1.3);
        let out = apply_gaussian(&attenuator(0.5).unwrap(), &GaussianState::coherent(eta).unwrap()).unwrap();
        assert_eq!(out, GaussianState::coherent(eta * 0.5).unwrap());
    }

    #[test]
    fn identity_channel_keeps_state() {
        let st = random_state(&mut random::rng(3), 2);
        let out = apply_gaussian(&GaussianChannel::identity(2).unwrap(), &st).unwrap();
        assert!((out.covariance() - st.covariance()).amax() < 1e-14);
        assert!((out.mean() - st.mean()).amax() < 1e-14);
    }

    #[test]
    fn char_fn_examples() {
        let vac = GaussianState::vacuum(1).unwrap();
        assert_eq!(char_fn(&vac, &RVector::zeros(2)).unwrap(), c64(1.0, 0.0));
        let z = RVector::from_vec(vec![1.0, 0.0]);
        assert_abs_diff_eq!(char_fn(&vac, &z).unwrap().re, (-0.5f64).exp(), epsilon = 1e-15);
        let shifted = GaussianState::new(1, z.clone(), RMatrix::identity(2, 2)).unwrap();
        let expected = Complex64::from_polar((-0.5f64).exp(), 1.0);
        assert!((char_fn(&shifted, &z).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn dual_weyl_examples() {
        let z = RVector::from_vec(vec![1.0, 0.0]);
        let (kz, f) = dual_weyl_symbol(&GaussianChannel::identity(1).unwrap(), &z).unwrap();
        assert_eq!((kz, f), (z.clone(), c64(1.0, 0.0)));
        let k = 0.3;
        let (kz, f) = dual_weyl_symbol(&attenuator(k).unwrap(), &z).unwrap();
        assert!((kz - RVector::from_vec(vec![k, 0.0])).amax() < 1e-15);
        assert!((f - c64((-(1.0 - k * k) / 2.0).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn chain_identity_on_random_instances() {
        let mut rng = random::rng(17);
        for _ in 0..20 {
            let st = random_state(&mut rng, 2);
            let ch = random_channel(&mut rng, 2, 1);
            let out = apply_gaussian(&ch, &st).unwrap();
            for z in z_grid(2, 25) {
                let (kz, factor) = dual_weyl_symbol(&ch, &z).unwrap();
                let lhs = char_fn(&out, &z).unwrap();
                let rhs = char_fn(&st, &kz).unwrap() * factor;
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn composition_matches_chained_application() {
        let mut rng = random::rng(23);
        let first = random_channel(&mut rng, 1, 2);
        let second = random_channel(&mut rng, 2, 1);
        let st = random_state(&mut rng, 1);
        let composed = compose(&first, &second).unwrap();
        assert!(validate_channel(&composed).valid);
        let direct = apply_gaussian(&composed, &st).unwrap();
        let chained = apply_gaussian(&second, &apply_gaussian(&first, &st).unwrap()).unwrap();
        assert!((direct.covariance() - chained.covariance()).amax() < 1e-12);
        assert!((direct.mean() - chained.mean()).amax() < 1e-12);
        assert!(compose(&first, &first).is_err());
    }

    #[test]
    fn overlap_matches_quadrature() {
        // Tr ρ₁ρ₂ = π^{-1} ∫ φ₁(z) φ₂(−z) dz, midpoint rule on [−8, 8]²
        let mut rng = random::rng(2);
        let a = random_state(&mut rng, 1);
        let b = GaussianState::coherent(c64(0.4, -0.2)).unwrap();
        let steps = 400;
        let h = 16.0 / steps as f64;
        let mut sum = c64(0.0, 0.0);
        for i in 0..steps {
            for j in 0..steps {
                let z = RVector::from_vec(vec![-8.0 + (i as f64 + 0.5) * h, -8.0 + (j as f64 + 0.5) * h]);
                sum += char_fn(&a, &z).unwrap() * char_fn(&b, &(-&z)).unwrap();
            }
        }
        let quad = sum.re * h * h / std::f64::consts::PI;
        assert!((overlap(&a, &b).unwrap() - quad).abs() < 1e-8);
    }

    #[test]
    fn coherent_overlap_convention() {
        for (a, b) in [(c64(0.0, 0.0), c64(1.0, 0.0)), (c64(0.3, 0.2), c64(-0.5, 1.0)), (c64(2.0, -1.0), c64(1.5, -0.5))] {
            let got = overlap(&GaussianState::coherent(a).unwrap(), &GaussianState::coherent(b).unwrap()).unwrap();
            assert_abs_diff_eq!(got, (-(a - b).norm_sqr()).exp(), epsilon = 1e-14);
        }
    }

    fn fock_overlap(a: Complex64, b: Complex64, cutoff: usize) -> Complex64 {
        // <a|b> = exp(−|a|²/2 − |b|²/2) Σ_n (ā b)^n / n!
        let x = a.conj() * b;
        let mut term = c64(1.0, 0.0);
        let mut sum = term;
        for n in 1..=cutoff {
            term = term * x / n as f64;
            sum += term;
        }
        sum * (-(a.norm_sqr() + b.norm_sqr()) / 2.0).exp()
    }

    #[test]
    fn output_distance_examples() {
        let eta = c64(10.0, 0.0);
        assert_eq!(attenuator_output_distance(0.5, 0.5, eta), 0.0);
        let expected = 2.0 * (1.0 - (-1.0f64).exp()).sqrt();
        assert_abs_diff_eq!(attenuator_output_distance(0.6, 0.5, eta), expected, epsilon = 1e-14);
        // cutoff 60 truncates the series at |ā b| = 30 with a relative
        // error near 1e-7; 120 terms converge to rounding
        let ov = fock_overlap(eta * 0.6, eta * 0.5, 60).norm_sqr();
        assert_abs_diff_eq!(2.0 * (1.0 - ov).sqrt(), expected, epsilon = 1e-6);
        let ov = fock_overlap(eta * 0.6, eta * 0.5, 120).norm_sqr();
        assert_abs_diff_eq!(2.0 * (1.0 - ov).sqrt(), expected, epsilon = 1e-12);
        assert!(attenuator_output_distance(0.6, 0.5, c64(100.0, 0.0)) > 2.0 - 1e-12);
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(z_grid(2, 625).len(), 25);
        assert_eq!(z_grid(4, 625).len(), 625);
        assert!(z_grid(6, 625).len() <= 625);
        assert_eq!(z_grid(2, 25)[0], RVector::from_vec(vec![-2.0, -2.0]));
    }

    #[test]
    fn convergence_check_examples() {
        let grid = z_grid(2, DEFAULT_GRID_POINTS);
        let states = standard_test_states(1).unwrap();
        let ns: Vec<usize> = (1..=10).collect();

        let constant = GaussianChannelSequence::constant(attenuator(0.3).unwrap());
        let rep = param_convergence_check(&constant, &ns, 1e-12, &states, &grid).unwrap();
        assert!(rep.rows.iter().all(|r| r.param_dev == 0.0 && r.charfn_dev == 0.0 && r.within_eps));

        let seq = GaussianChannelSequence::attenuators(|n| if n == 0 { 0.5 } else { 0.5 + 0.5 / n as f64 }).unwrap();
        let rep = param_convergence_check(&seq, &ns, 1e-3, &states, &grid).unwrap();
        for r in &rep.rows {
            assert_abs_diff_eq!(r.k_dev, 0.5 / r.n as f64, epsilon = 1e-14);
        }
        assert!(rep.rows.windows(2).all(|w| w[1].charfn_dev < w[0].charfn_dev));

        let id = GaussianChannel::identity(1).unwrap();
        let flip = GaussianChannelSequence::new("shift", id.clone(), move |n| {
            let ell = RVector::from_vec(vec![(n % 2) as f64, 0.0]);
            GaussianChannel::new(1, 1, id.k().clone(), ell, id.alpha().clone())
        });
        let rep = param_convergence_check(&flip, &ns, 1e-3, &states, &grid).unwrap();
        let z = RVector::from_vec(vec![1.0, 0.0]);
        let floor = (c64(0.0, 1.0).exp() - c64(1.0, 0.0)).norm() * char_fn(&states[0].1, &z).unwrap().norm();
        for r in rep.rows.iter().filter(|r| r.n % 2 == 1) {
            assert!(r.charfn_dev >= floor - 1e-12);
        }
        assert!(rep.to_csv().starts_with(PARAM_CSV_HEADER));
    }

    #[test]
    fn random_generators_are_valid() {
        let mut rng = random::rng(31);
        for s in 1..=3 {
            let sym = random_symplectic(&mut rng, s);
            assert!((sym.transpose() * delta(s) * &sym - delta(s)).amax() < 1e-12);
            assert!(validate_state(&random_state(&mut rng, s)).valid);
            assert!(validate_channel(&random_channel(&mut rng, s, 4 - s)).valid);
        }
    }

    #[test]
    fn serde_layout() {
        let ch = attenuator(0.5).unwrap();
        let v: serde_json::Value = serde_json::to_value(&ch).unwrap();
        for key in ["s_in", "s_out", "K", "ell", "alpha"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: GaussianChannel = serde_json::from_value(v).unwrap();
        assert_eq!(back, ch);
        let st: GaussianState = serde_json::from_str(r#"{"s":1,"m":[0,0],"sigma":[[1,0],[0,1]]}"#).unwrap();
        assert_eq!(st, GaussianState::vacuum(1).unwrap());
    }
}
