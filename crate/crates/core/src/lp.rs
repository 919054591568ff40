//! Finite weighted `L^p` spaces and dense operators acting on them.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat, ZERO};
use crate::variation::{vq_prefix_norms, VariationExponent};

/// Atoms with strictly positive masses.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    weights: Arc<Vec<f64>>,
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Input("measure space needs at least one atom".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Input(format!("atom {i} has non-positive or non-finite weight")));
        }
        Ok(Self { weights: Arc::new(weights) })
    }

    /// `n` atoms of mass `1/n`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform measure space needs n > 0");
        Self { weights: Arc::new(vec![1.0 / n as f64; n]) }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `‖x‖_p` for a raw entry slice. `p = ∞` gives the max modulus.
pub fn lp_norm_raw(entries: &[Complex64], weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return entries.iter().fold(0.0, |m, z| m.max(z.norm()));
    }
    lp_norm_of_moduli(entries.iter().map(|z| z.norm()), weights, p)
}

pub(crate) fn lp_norm_of_moduli<I: Iterator<Item = f64>>(moduli: I, weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return moduli.fold(0.0, f64::max);
    }
    let s: f64 = if p == 2.0 {
        moduli.zip(weights).map(|(a, w)| w * a * a).sum::<f64>()
    } else if p == 1.0 {
        return moduli.zip(weights).map(|(a, w)| w * a).sum::<f64>();
    } else {
        moduli.zip(weights).map(|(a, w)| w * a.powf(p)).sum::<f64>()
    };
    s.powf(1.0 / p)
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Parameter(format!("p must lie in [1, ∞], got {p}")));
    }
    Ok(())
}

/// A function on a [`MeasureSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct LpVector {
    entries: Vec<Complex64>,
    space: MeasureSpace,
}

impl LpVector {
    pub fn new(entries: Vec<Complex64>, space: MeasureSpace) -> Result<Self> {
        if entries.len() != space.size() {
            return Err(Error::Input(format!(
                "vector has {} entries but the space has {} atoms",
                entries.len(),
                space.size()
            )));
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Input("vector entries must be finite".into()));
        }
        Ok(Self { entries, space })
    }

    pub fn from_real(values: &[f64], space: MeasureSpace) -> Result<Self> {
        Self::new(values.iter().map(|&x| real(x)).collect(), space)
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.entries)
    }
}

/// `(Σ μ_λ |x_λ|^p)^{1/p}`, or the max modulus for `p = ∞`.
pub fn lp_norm(x: &LpVector, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_norm_raw(&x.entries, x.space.weights(), p))
}

/// Structural facts about a matrix, cached at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorFlags {
    pub nonnegative_entries: bool,
    pub row_stochastic: bool,
    /// `‖T*T − TT*‖₂` with the adjoint taken in the weighted inner product.
    pub normality_defect: f64,
}

const FLAG_TOL: f64 = 1e-12;

/// A dense operator on a finite measure space.
#[derive(Debug, Clone)]
pub struct MatrixOperator {
    matrix: CMat,
    space: MeasureSpace,
    flags: OperatorFlags,
}

impl MatrixOperator {
    pub fn new(matrix: CMat, space: MeasureSpace) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() != space.size() {
            return Err(Error::Input(format!(
                "operator is {}x{} but the space has {} atoms",
                matrix.nrows(),
                matrix.ncols(),
                space.size()
            )));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Input("operator entries must be finite".into()));
        }
        let flags = compute_flags(&matrix, &space);
        Ok(Self { matrix, space, flags })
    }

    /// Convenience for the uniform probability measure.
    pub fn uniform(matrix: CMat) -> Result<Self> {
        let n = matrix.nrows().max(1);
        Self::new(matrix, MeasureSpace::uniform(n))
    }

    pub fn from_real_rows(rows: &[Vec<f64>], space: MeasureSpace) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Input("operator rows must form a square matrix".into()));
        }
        let m = CMat::from_fn(n, n, |i, j| real(rows[i][j]));
        Self::new(m, space)
    }

    pub fn identity(space: MeasureSpace) -> Self {
        let n = space.size();
        Self::new(linalg::identity(n), space).expect("identity is valid")
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn flags(&self) -> OperatorFlags {
        self.flags
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    /// Same space, new matrix.
    pub fn with_matrix(&self, matrix: CMat) -> Result<Self> {
        Self::new(matrix, self.space.clone())
    }

    pub fn apply(&self, x: &LpVector) -> Result<LpVector> {
        if x.space != self.space {
            return Err(Error::Input("vector and operator live on different spaces".into()));
        }
        let y = &self.matrix * x.to_dvector();
        LpVector::new(y.iter().copied().collect(), self.space.clone())
    }

    /// `D^{1/2} T D^{-1/2}`: unitarily equivalent to `T` on weighted `L^2`.
    pub fn symmetrized(&self) -> CMat {
        similarity(&self.matrix, self.space.weights(), 2.0)
    }

    /// Adjoint in the weighted inner product, `D^{-1} T^H D`.
    pub fn weighted_adjoint(&self) -> CMat {
        weighted_adjoint(&self.matrix, self.space.weights())
    }
}

/// `D^{1/p} T D^{-1/p}`, an isometric copy of `T` on unweighted `ℓ^p`.
pub(crate) fn similarity(t: &CMat, weights: &[f64], p: f64) -> CMat {
    let n = t.nrows();
    CMat::from_fn(n, n, |i, j| t[(i, j)] * (weights[i] / weights[j]).powf(1.0 / p))
}

pub(crate) fn weighted_adjoint(t: &CMat, weights: &[f64]) -> CMat {
    let n = t.nrows();
    CMat::from_fn(n, n, |i, j| t[(j, i)].conj() * (weights[j] / weights[i]))
}

fn compute_flags(t: &CMat, space: &MeasureSpace) -> OperatorFlags {
    let nonnegative_entries = t.iter().all(|z| z.re >= -FLAG_TOL && z.im.abs() <= FLAG_TOL);
    let row_stochastic = nonnegative_entries
        && (0..t.nrows()).all(|i| (t.row(i).iter().map(|z| z.re).sum::<f64>() - 1.0).abs() <= FLAG_TOL);
    let adj = weighted_adjoint(t, space.weights());
    let comm = &adj * t - t * &adj;
    // The weighted 2-norm of a matrix equals the spectral norm of its symmetrized copy.
    let normality_defect = linalg::spectral_norm(&similarity(&comm, space.weights(), 2.0));
    OperatorFlags { nonnegative_entries, row_stochastic, normality_defect }
}

/// Two-sided estimate of an operator norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl NormEstimate {
    pub fn exact(v: f64) -> Self {
        Self { lower: v, upper: v, exact: true }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Controls the lower-bound search for `p ∉ {1, 2, ∞}`.
#[derive(Debug, Clone, Copy)]
pub struct PnormOptions {
    pub samples: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for PnormOptions {
    fn default() -> Self {
        Self { samples: 16, ascent_steps: 30, seed: 0x5eed_0f_9a55 }
    }
}

/// `‖T‖_{1→1}` on the weighted space: `max_j Σ_i μ_i |T_ij| / μ_j`.
pub(crate) fn norm_1_weighted(t: &CMat, w: &[f64]) -> f64 {
    (0..t.ncols())
        .map(|j| (0..t.nrows()).map(|i| w[i] * t[(i, j)].norm()).sum::<f64>() / w[j])
        .fold(0.0, f64::max)
}

pub(crate) fn norm_2_weighted(t: &CMat, w: &[f64]) -> f64 {
    linalg::spectral_norm(&similarity(t, w, 2.0))
}

/// Operator norm of a raw matrix on the weighted `L^p` space.
pub fn pnorm_matrix(t: &CMat, w: &[f64], p: f64, opts: &PnormOptions) -> NormEstimate {
    if p == 1.0 {
        return NormEstimate::exact(norm_1_weighted(t, w));
    }
    if p.is_infinite() {
        return NormEstimate::exact(linalg::norm_inf(t));
    }
    let n2 = norm_2_weighted(t, w);
    if p == 2.0 {
        return NormEstimate::exact(n2);
    }
    let n1 = norm_1_weighted(t, w);
    let ninf = linalg::norm_inf(t);
    // Riesz–Thorin between whichever endpoint pairs bracket p.
    let mut upper = n1.powf(1.0 / p) * ninf.powf(1.0 - 1.0 / p);
    if p < 2.0 {
        let theta = 2.0 * (1.0 - 1.0 / p);
        upper = upper.min(n1.powf(1.0 - theta) * n2.powf(theta));
    } else {
        let theta = 2.0 / p;
        upper = upper.min(n2.powf(theta) * ninf.powf(1.0 - theta));
    }
    let lower = pnorm_lower_bound(t, w, p, opts).min(upper);
    NormEstimate { lower, upper, exact: upper - lower <= 1e-9 * upper.max(1.0) }
}

fn dual_map(y: &DVector<Complex64>, p: f64) -> DVector<Complex64> {
    // Unit vector in ℓ^{p'} norming y in ℓ^p: |y|^{p-1} sgn(y) / ‖y‖_p^{p-1}.
    let norm = y.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p);
    y.map(|z| {
        let r = z.norm();
        if r == 0.0 || norm == 0.0 {
            ZERO
        } else {
            (z / r) * (r / norm).powf(p - 1.0)
        }
    })
}

fn lp_unweighted(v: &DVector<Complex64>, p: f64) -> f64 {
    v.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Certified lower bound: every value returned is `‖C x‖_p / ‖x‖_p` for an explicit `x`.
fn pnorm_lower_bound(t: &CMat, w: &[f64], p: f64, opts: &PnormOptions) -> f64 {
    let n = t.nrows();
    let c = similarity(t, w, p);
    let ch = c.adjoint();
    let q = p / (p - 1.0);
    let complex = t.iter().any(|z| z.im != 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = 0.0f64;
    let mut starts: Vec<DVector<Complex64>> = Vec::with_capacity(opts.samples + n);
    // coordinate vectors and the all-ones vector are cheap deterministic starts
    starts.push(DVector::from_element(n, real(1.0)));
    for j in 0..n.min(8) {
        let mut e = DVector::from_element(n, ZERO);
        e[j] = real(1.0);
        starts.push(e);
    }
    for _ in 0..opts.samples {
        starts.push(DVector::from_fn(n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
            Complex64::new(re, im)
        }));
    }
    for mut x in starts {
        let nx = lp_unweighted(&x, p);
        if nx == 0.0 {
            continue;
        }
        x /= real(nx);
        // Boyd / Higham power iteration for the p-norm.
        for _ in 0..=opts.ascent_steps {
            let y = &c * &x;
            let val = lp_unweighted(&y, p);
            best = best.max(val);
            if val == 0.0 {
                break;
            }
            let z = &ch * dual_map(&y, p);
            let zq = lp_unweighted(&z, q);
            let zx = z.dotc(&x).re;
            if zq <= zx * (1.0 + 1e-12) {
                break;
            }
            x = dual_map(&z, q);
        }
    }
    best
}

/// `‖T‖_{p→p}`: exact at `p ∈ {1, 2, ∞}`, an interval otherwise.
pub fn operator_pnorm(t: &MatrixOperator, p: f64) -> Result<NormEstimate> {
    check_p(p)?;
    Ok(pnorm_matrix(&t.matrix, t.space.weights(), p, &PnormOptions::default()))
}

/// Entrywise modulus `|T|`.
pub fn modulus_operator(t: &MatrixOperator) -> MatrixOperator {
    let m = t.matrix.map(|z| real(z.norm()));
    MatrixOperator::new(m, t.space.clone()).expect("modulus of a valid operator is valid")
}

/// Regular norm `‖|T|‖_{p→p}`.
pub fn regular_norm(t: &MatrixOperator, p: f64) -> Result<NormEstimate> {
    operator_pnorm(&modulus_operator(t), p)
}

/// `M_n(T) = (n+1)^{-1} Σ_{k=0}^{n} T^k`.
pub fn ergodic_average(t: &MatrixOperator, n: usize) -> MatrixOperator {
    let dim = t.dim();
    let mut power = linalg::identity(dim);
    let mut sum = power.clone();
    for _ in 0..n {
        power = &t.matrix * &power;
        sum += &power;
    }
    sum *= real(1.0 / (n as f64 + 1.0));
    t.with_matrix(sum).expect("average of a finite operator is finite")
}

pub fn matrix_power(t: &CMat, n: usize) -> CMat {
    let mut out = linalg::identity(t.nrows());
    let mut base = t.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            out = &out * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    out
}

/// Raw `Δ_n^m = T^n (T − I)^m` for `m ≥ 0`, and `Σ_{j<n} T^j` for `m = −1`.
pub fn difference_matrix(t: &CMat, n: usize, m: i32) -> Result<CMat> {
    let dim = t.nrows();
    match m {
        m if m < -1 => Err(Error::Parameter(format!("difference order must be >= -1, got {m}"))),
        -1 => {
            if n == 0 {
                return Err(Error::Parameter("Δ_n^{-1} requires n >= 1".into()));
            }
            let mut power = linalg::identity(dim);
            let mut sum = power.clone();
            for _ in 1..n {
                power = t * &power;
                sum += &power;
            }
            Ok(sum)
        }
        m => {
            let shifted = t - linalg::identity(dim);
            let mut out = matrix_power(t, n);
            for _ in 0..m {
                out = &out * &shifted;
            }
            Ok(out)
        }
    }
}

pub fn difference_operator(t: &MatrixOperator, n: usize, m: i32) -> Result<MatrixOperator> {
    t.with_matrix(difference_matrix(&t.matrix, n, m)?)
}

/// Projection onto `N(K)` along `R(K)`; fails when the two are not complementary.
pub fn kernel_projection(k: &CMat) -> Result<CMat> {
    let n = k.nrows();
    let tol = 1e-9;
    let v = linalg::null_space(k, tol);
    let w = linalg::null_space(&k.adjoint(), tol);
    if v.ncols() != w.ncols() {
        return Err(Error::Degeneracy(format!(
            "null spaces of K and K^H differ in dimension ({} vs {})",
            v.ncols(),
            w.ncols()
        )));
    }
    if v.ncols() == 0 {
        return Ok(CMat::zeros(n, n));
    }
    let gram = w.adjoint() * &v;
    let s = linalg::singular_values(&gram);
    let cond = s[0] / s[s.len() - 1];
    if !(cond.is_finite() && cond <= 1e8) {
        return Err(Error::Degeneracy(format!(
            "eigenvalue is defective: N(K) and R(K) are not complementary (condition {cond:.3e})"
        )));
    }
    let ginv = linalg::inverse(&gram)?;
    Ok(&v * ginv * w.adjoint())
}

/// Mean ergodic projection together with its Cesàro diagnostics.
#[derive(Debug, Clone)]
pub struct MeanErgodicProjection {
    pub projection: MatrixOperator,
    /// `‖M_n(T) − P‖₂` at `n = 2^k`, `k = 0..=10`.
    pub cesaro_residuals: Vec<(usize, f64)>,
    /// Residual at the largest `n`.
    pub residual: f64,
    pub idempotence_defect: f64,
}

pub fn mean_ergodic_projection(t: &MatrixOperator) -> Result<MeanErgodicProjection> {
    let rho = linalg::spectral_radius(&t.matrix)?;
    if rho > 1.0 + 1e-9 {
        return Err(Error::Precondition(format!("spectral radius {rho} exceeds 1")));
    }
    let dim = t.dim();
    let k = linalg::identity(dim) - &t.matrix;
    let p = kernel_projection(&k)?;
    let w = t.space.weights();
    let idempotence_defect = norm_2_weighted(&(&p * &p - &p), w);
    if idempotence_defect > 1e-9 {
        return Err(Error::Degeneracy(format!("projection not idempotent (defect {idempotence_defect:.3e})")));
    }
    let mut cesaro_residuals = Vec::new();
    let mut power = linalg::identity(dim);
    let mut sum = power.clone();
    for n in 1..=1024usize {
        power = &t.matrix * &power;
        sum += &power;
        if n.is_power_of_two() {
            let avg = &sum * real(1.0 / (n as f64 + 1.0));
            cesaro_residuals.push((n, norm_2_weighted(&(avg - &p), w)));
        }
    }
    let residual = cesaro_residuals.last().map(|r| r.1).unwrap_or(0.0);
    Ok(MeanErgodicProjection {
        projection: t.with_matrix(p)?,
        cesaro_residuals,
        residual,
        idempotence_defect,
    })
}

/// `‖λ ↦ ‖(x_n(λ))_n‖_{v^q}‖_p`.
pub fn bochner_variation_norm(samples: &[LpVector], p: f64, q: VariationExponent) -> Result<f64> {
    check_p(p)?;
    let first = samples.first().ok_or_else(|| Error::Input("need at least one sample".into()))?;
    if samples.iter().any(|s| s.space != first.space) {
        return Err(Error::Input("samples live on different measure spaces".into()));
    }
    let n = first.space.size();
    let mut traj = vec![ZERO; samples.len()];
    let mut pointwise = Vec::with_capacity(n);
    for atom in 0..n {
        for (k, s) in samples.iter().enumerate() {
            traj[k] = s.entries[atom];
        }
        pointwise.push(*vq_prefix_norms(&traj, q).last().expect("nonempty"));
    }
    Ok(lp_norm_of_moduli(pointwise.into_iter(), first.space.weights(), p))
}
