//! Power-boundedness and analyticity diagnostics for matrix operators.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat};
use crate::lp::{pnorm_matrix, MatrixOperator, NormEstimate, PnormOptions};
use crate::par;

/// Spectral radius above `1 + RADIUS_TOL` counts as divergent.
pub const RADIUS_TOL: f64 = 1e-9;
/// Eigenvalues within this distance of 1 are treated as equal to 1.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-10;
/// Moduli above `1 - PERIPHERAL_TOL` are treated as lying on the unit circle.
pub const PERIPHERAL_TOL: f64 = 1e-12;
pub const NRANGE_GRID: usize = 720;
/// Eigenvector matrices worse conditioned than this are refused.
pub const EIGEN_COND_LIMIT: f64 = 1e8;
/// Bounded-profile rule: last-quartile max ≤ `GROWTH_FACTOR` × first-quartile max.
pub const GROWTH_FACTOR: f64 = 1.05;
pub const MIN_PROFILE_LEN: usize = 32;

/// Parameters of the Stolz region `B_γ`, the convex hull of 1 and the disc of radius `sin γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StolzParams {
    pub gamma: f64,
    pub k: f64,
}

impl StolzParams {
    pub fn new(gamma: f64, k: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < FRAC_PI_2) {
            return Err(Error::Parameter(format!("gamma must lie in (0, π/2), got {gamma}")));
        }
        if !(k > 0.0) {
            return Err(Error::Parameter(format!("K must be positive, got {k}")));
        }
        Ok(Self { gamma, k })
    }
}

/// Support function of `B_γ` in direction `θ`.
pub fn stolz_support(theta: f64, gamma: f64) -> f64 {
    theta.cos().max(gamma.sin())
}

/// Exact membership test `λ ∈ B_γ` (up to `tol`).
///
/// The slack `Re(λ e^{-iθ}) − h(θ)` is a maximum of two sinusoid differences, so its
/// maximum over θ is attained at a critical point of one piece or at a breakpoint.
pub fn in_stolz_region(lambda: Complex64, gamma: f64, tol: f64) -> bool {
    let s = gamma.sin();
    if lambda.norm() <= s + tol {
        return true;
    }
    let breakpoint = FRAC_PI_2 - gamma;
    let candidates = [lambda.arg(), (lambda - 1.0).arg(), breakpoint, -breakpoint, 0.0, PI];
    candidates.iter().all(|&th| {
        let proj = lambda.re * th.cos() + lambda.im * th.sin();
        proj <= stolz_support(th, gamma) + tol
    })
}

/// Profile `n ↦ n‖Tⁿ − Tⁿ⁻¹‖_p` for `n = 1..=N`, with the certified lower companion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffProfile {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    /// Largest `‖Tⁿ‖_p` (upper bound) over `n = 0..=N`.
    pub power_bound: NormEstimate,
}

fn profile_options() -> PnormOptions {
    PnormOptions { samples: 6, ascent_steps: 12, ..PnormOptions::default() }
}

fn ensure_not_divergent(t: &MatrixOperator) -> Result<f64> {
    let rho = linalg::spectral_radius(t.matrix())?;
    if rho > 1.0 + RADIUS_TOL {
        return Err(Error::Divergence(format!("spectral radius {rho} exceeds 1, powers blow up")));
    }
    Ok(rho)
}

pub fn diff_profile(t: &MatrixOperator, p: f64, n_max: usize) -> Result<DiffProfile> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Parameter(format!("p must lie in [1, ∞], got {p}")));
    }
    if n_max == 0 || n_max > 100_000 {
        return Err(Error::Parameter(format!("profile length must lie in 1..=100000, got {n_max}")));
    }
    ensure_not_divergent(t)?;
    let w = t.space().weights();
    let opts = profile_options();
    let m = t.matrix();
    let dim = t.dim();
    // D_n = T^{n-1}(T - I), P_n = T^n
    let mut diff = m - linalg::identity(dim);
    let mut power = m.clone();
    let mut upper = Vec::with_capacity(n_max);
    let mut lower = Vec::with_capacity(n_max);
    let mut pb = NormEstimate::exact(1.0);
    let mut diffs = Vec::with_capacity(n_max);
    let mut powers = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            diff = m * &diff;
            power = m * &power;
        }
        if diff.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Divergence(format!("matrix powers overflowed at n = {n}")));
        }
        diffs.push(diff.clone());
        powers.push(power.clone());
    }
    let est = par::map(&diffs, |d| pnorm_matrix(d, w, p, &opts));
    let pest = par::map(&powers, |d| pnorm_matrix(d, w, p, &opts));
    for (i, e) in est.iter().enumerate() {
        let n = (i + 1) as f64;
        upper.push(n * e.upper);
        lower.push(n * e.lower);
    }
    for e in pest {
        pb.lower = pb.lower.max(e.lower);
        pb.upper = pb.upper.max(e.upper);
        pb.exact &= e.exact;
    }
    Ok(DiffProfile { upper, lower, power_bound: pb })
}

/// Grid estimate of `sup_{|z|>1} |z − 1| ‖(zI − T)^{-1}‖_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RittEstimate {
    pub estimate: NormEstimate,
    pub radii: Vec<f64>,
    pub angles_per_radius: usize,
    /// Grid point attaining the upper value.
    pub argmax: Complex64,
    /// Always true: sampling only ever bounds the supremum from below.
    pub grid_lower_estimate: bool,
}

pub fn ritt_resolvent_sup(t: &MatrixOperator, p: f64, radii: &[f64], angles_per_radius: usize) -> Result<RittEstimate> {
    if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 1.0)) {
        return Err(Error::Parameter("resolvent radii must be finite and > 1".into()));
    }
    if angles_per_radius == 0 {
        return Err(Error::Parameter("angles_per_radius must be positive".into()));
    }
    let rho = linalg::spectral_radius(t.matrix())?;
    if rho > 1.0 + RADIUS_TOL {
        return Err(Error::Precondition(format!("spectral radius {rho} exceeds 1")));
    }
    let grid: Vec<Complex64> = radii
        .iter()
        .flat_map(|&r| {
            (0..angles_per_radius).map(move |k| Complex64::from_polar(r, 2.0 * PI * k as f64 / angles_per_radius as f64))
        })
        .collect();
    let w = t.space().weights();
    let opts = profile_options();
    let dim = t.dim();
    let vals = par::map(&grid, |&z| -> Result<(f64, f64, bool)> {
        let shifted = linalg::identity(dim) * z - t.matrix();
        let inv = linalg::inverse(&shifted)
            .map_err(|_| Error::Numeric(format!("zI - T is singular at z = {z}")))?;
        let e = pnorm_matrix(&inv, w, p, &opts);
        let f = (z - 1.0).norm();
        Ok((f * e.lower, f * e.upper, e.exact))
    });
    let mut est = NormEstimate { lower: 0.0, upper: 0.0, exact: true };
    let mut argmax = grid[0];
    for (z, v) in grid.iter().zip(vals) {
        let (lo, hi, exact) = v?;
        est.lower = est.lower.max(lo);
        if hi > est.upper {
            est.upper = hi;
            argmax = *z;
        }
        est.exact &= exact;
    }
    Ok(RittEstimate {
        estimate: est,
        radii: radii.to_vec(),
        angles_per_radius,
        argmax,
        grid_lower_estimate: true,
    })
}

/// Smallest Stolz constants compatible with the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StolzCheck {
    /// `max |1−λ|/(1−|λ|)` over eigenvalues `λ ≠ 1`; infinite when one touches the circle.
    #[serde(with = "crate::serde_ext::extended")]
    pub k_min: f64,
    pub gamma_min: Option<f64>,
    /// Set when every eigenvalue equals 1, so the maximum above is over an empty set.
    pub empty_max: bool,
    pub eigenvalues: Vec<Complex64>,
}

/// Stolz data of an explicit list of eigenvalues.
pub fn stolz_from_eigenvalues(eigs: &[Complex64]) -> StolzCheck {
    let mut k_min = 0.0f64;
    let mut empty_max = true;
    let mut peripheral = false;
    for &lam in eigs {
        if (lam - 1.0).norm() <= UNIT_EIGENVALUE_TOL {
            continue;
        }
        empty_max = false;
        let r = lam.norm();
        if r >= 1.0 - PERIPHERAL_TOL {
            peripheral = true;
            k_min = f64::INFINITY;
        } else {
            k_min = k_min.max((1.0 - lam).norm() / (1.0 - r));
        }
    }
    let gamma_min = if peripheral {
        None
    } else {
        let others: Vec<Complex64> =
            eigs.iter().copied().filter(|l| (l - 1.0).norm() > UNIT_EIGENVALUE_TOL).collect();
        let fits = |g: f64| others.iter().all(|&l| in_stolz_region(l, g, 1e-12));
        let (mut lo, mut hi) = (0.0, FRAC_PI_2);
        if fits(0.0) {
            hi = 0.0;
        } else {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if fits(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
        (hi < FRAC_PI_2).then_some(hi)
    };
    StolzCheck { k_min, gamma_min, empty_max, eigenvalues: eigs.to_vec() }
}

pub fn stolz_spectrum_check(t: &MatrixOperator) -> Result<StolzCheck> {
    let eig = linalg::eigen_decompose(t.matrix(), EIGEN_COND_LIMIT)?;
    Ok(stolz_from_eigenvalues(&eig.values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericalRangeCheck {
    pub contained: bool,
    /// `min_θ (h_B(θ) − h_W(θ))`.
    pub margin: f64,
    pub grid_points: usize,
}

/// Support function of `W(T)` on the weighted inner product at each angle.
pub fn numerical_range_support(t: &MatrixOperator, thetas: &[f64]) -> Vec<f64> {
    let b = t.symmetrized();
    let bh = b.adjoint();
    par::map(thetas, |&th| {
        let e = Complex64::from_polar(1.0, -th);
        let h: CMat = (&b * e + &bh * e.conj()) * real(0.5);
        linalg::hermitian_max_eigenvalue(&h)
    })
}

pub fn numerical_range_check(t: &MatrixOperator, gamma: f64) -> Result<NumericalRangeCheck> {
    if !(gamma > 0.0 && gamma < FRAC_PI_2) {
        return Err(Error::Parameter(format!("gamma must lie in (0, π/2), got {gamma}")));
    }
    let thetas: Vec<f64> = (0..NRANGE_GRID).map(|k| 2.0 * PI * k as f64 / NRANGE_GRID as f64).collect();
    let h = numerical_range_support(t, &thetas);
    let margin = thetas
        .iter()
        .zip(&h)
        .map(|(&th, hw)| stolz_support(th, gamma) - hw)
        .fold(f64::INFINITY, f64::min);
    Ok(NumericalRangeCheck { contained: margin >= -1e-10, margin, grid_points: NRANGE_GRID })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionCheck {
    #[serde(with = "crate::serde_ext::extended")]
    pub k_min: f64,
    pub empty_max: bool,
    pub fourier: Vec<Complex64>,
}

/// `ν̂(s) = Σ_j ν_j e^{-2πi js/N}`.
pub fn dft(nu: &[f64]) -> Vec<Complex64> {
    let n = nu.len();
    (0..n)
        .map(|s| {
            nu.iter()
                .enumerate()
                .map(|(j, &v)| Complex64::from_polar(v, -2.0 * PI * ((j * s) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

pub fn convolution_criterion(nu: &[f64]) -> Result<ConvolutionCheck> {
    if nu.is_empty() {
        return Err(Error::Input("kernel must be nonempty".into()));
    }
    if nu.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Input("kernel entries must be finite and nonnegative".into()));
    }
    let total: f64 = nu.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Input(format!("kernel must sum to 1, got {total}")));
    }
    let fourier = dft(nu);
    let check = stolz_from_eigenvalues(&fourier);
    Ok(ConvolutionCheck { k_min: check.k_min, empty_max: check.empty_max, fourier })
}

/// `n max_λ |λ|^{n−1}|1−λ|` for `n = 1..=N`, valid at `p = 2` for normal `T`.
pub fn normal_spectral_diff_formula(t: &MatrixOperator, n_max: usize) -> Result<Vec<f64>> {
    let defect = t.flags().normality_defect;
    if defect > 1e-8 {
        return Err(Error::Precondition(format!("operator is not normal (defect {defect:.3e})")));
    }
    let eigs = linalg::eigenvalues(t.matrix())?;
    Ok((1..=n_max)
        .map(|n| {
            let m = eigs
                .iter()
                .map(|l| l.norm().powi(n as i32 - 1) * (1.0 - l).norm())
                .fold(0.0, f64::max);
            n as f64 * m
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Analytic,
    NotAnalytic,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityOptions {
    pub p: f64,
    pub n_max: usize,
    pub ritt_radii: Vec<f64>,
    pub angles_per_radius: usize,
}

impl Default for AnalyticityOptions {
    fn default() -> Self {
        Self { p: 2.0, n_max: 256, ritt_radii: vec![1.5, 1.1, 1.01, 1.001], angles_per_radius: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityReport {
    pub operator_id: String,
    pub options: AnalyticityOptions,
    pub power_bound: NormEstimate,
    pub diff_profile: Vec<f64>,
    pub diff_profile_lower: Vec<f64>,
    pub profile_bounded: bool,
    pub ritt_sup: NormEstimate,
    /// `None` when the eigenproblem was refused as ill-conditioned.
    #[serde(with = "crate::serde_ext::extended_opt")]
    pub stolz_k: Option<f64>,
    pub gamma_min: Option<f64>,
    pub verdict: Verdict,
}

/// Growth test on a profile: needs at least [`MIN_PROFILE_LEN`] points.
pub fn profile_is_bounded(profile: &[f64]) -> bool {
    let n = profile.len();
    if n < MIN_PROFILE_LEN {
        return false;
    }
    let q = n / 4;
    let first = profile[..q].iter().copied().fold(0.0, f64::max);
    let last = profile[n - q..].iter().copied().fold(0.0, f64::max);
    last <= GROWTH_FACTOR * first
}

pub fn analyze(t: &MatrixOperator, operator_id: &str, opts: &AnalyticityOptions) -> Result<AnalyticityReport> {
    let prof = diff_profile(t, opts.p, opts.n_max)?;
    let ritt = ritt_resolvent_sup(t, opts.p, &opts.ritt_radii, opts.angles_per_radius)?;
    let stolz = match stolz_spectrum_check(t) {
        Ok(s) => Some(s),
        Err(Error::Degeneracy(_)) => None,
        Err(e) => return Err(e),
    };
    let bounded = profile_is_bounded(&prof.upper);
    let verdict = match &stolz {
        Some(s) if s.k_min.is_infinite() => Verdict::NotAnalytic,
        Some(_) if bounded => Verdict::Analytic,
        _ => Verdict::Inconclusive,
    };
    Ok(AnalyticityReport {
        operator_id: operator_id.to_string(),
        options: opts.clone(),
        power_bound: prof.power_bound,
        diff_profile: prof.upper,
        diff_profile_lower: prof.lower,
        profile_bounded: bounded,
        ritt_sup: ritt.estimate,
        stolz_k: stolz.as_ref().map(|s| s.k_min),
        gamma_min: stolz.and_then(|s| s.gamma_min),
        verdict,
    })
}
