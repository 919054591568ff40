//! Semigroups `e^{tA}` generated by bounded matrices, their averages and subordinates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat};
use crate::lp::{pnorm_matrix, MatrixOperator, MeasureSpace, PnormOptions};
use crate::par;
use crate::quad;

const FLAG_TOL: f64 = 1e-12;
/// Omitted stable-density mass on either side of the quadrature window.
const LOWER_TAIL_X: f64 = 7.0;
const UPPER_TAIL_X: f64 = 2e-11;
const QUAD_TOL: f64 = 1e-11;
const QUAD_MAX_PANELS: usize = 20_000;
/// `expm(sA)` is trusted up to `s‖A‖` of this size.
const EXPM_RANGE: f64 = 1e12;
const SETTLE_TOL: f64 = 1e-14;

/// A bounded generator on a finite measure space.
#[derive(Debug, Clone)]
pub struct GeneratorModel {
    a: CMat,
    space: MeasureSpace,
    markov: bool,
}

impl GeneratorModel {
    pub fn new(a: CMat, space: MeasureSpace) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() != space.size() {
            return Err(Error::Input(format!(
                "generator is {}x{} but the space has {} atoms",
                a.nrows(),
                a.ncols(),
                space.size()
            )));
        }
        if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Input("generator entries must be finite".into()));
        }
        let n = a.nrows();
        let markov = a.iter().all(|z| z.im.abs() <= FLAG_TOL)
            && (0..n).all(|i| {
                let off_ok = (0..n).all(|j| i == j || a[(i, j)].re >= -FLAG_TOL);
                off_ok && a.row(i).iter().map(|z| z.re).sum::<f64>().abs() <= FLAG_TOL
            });
        Ok(Self { a, space, markov })
    }

    /// `A = T − I`.
    pub fn markov_generator_from(t: &MatrixOperator) -> Self {
        let a = t.matrix() - linalg::identity(t.dim());
        Self::new(a, t.space().clone()).expect("T - I is a valid generator")
    }

    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn is_markov(&self) -> bool {
        self.markov
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_real(&self) -> bool {
        self.a.iter().all(|z| z.im == 0.0)
    }

    fn wrap(&self, m: CMat) -> Result<MatrixOperator> {
        let m = if self.is_real() { m.map(|z| real(z.re)) } else { m };
        MatrixOperator::new(m, self.space.clone())
    }
}

fn check_time(t: f64, allow_zero: bool) -> Result<()> {
    let ok = t.is_finite() && (t > 0.0 || (allow_zero && t == 0.0));
    if !ok {
        return Err(Error::Parameter(format!("time must be finite and {} 0, got {t}", if allow_zero { ">=" } else { ">" })));
    }
    Ok(())
}

/// `T_t = e^{tA}`.
pub fn evolve(g: &GeneratorModel, t: f64) -> Result<MatrixOperator> {
    check_time(t, true)?;
    g.wrap(linalg::expm(&(&g.a * real(t))))
}

/// `M_t = t^{-1} ∫_0^t T_s ds = φ(tA)`.
pub fn continuous_average(g: &GeneratorModel, t: f64) -> Result<MatrixOperator> {
    check_time(t, false)?;
    g.wrap(linalg::phi1(&(&g.a * real(t))))
}

/// Direct adaptive quadrature of `t^{-1} ∫_0^t e^{sA} ds`; used to cross-check [`continuous_average`].
pub fn continuous_average_quadrature(g: &GeneratorModel, t: f64) -> Result<MatrixOperator> {
    check_time(t, false)?;
    let n = g.dim();
    let r = quad::integrate(
        |s| linalg::expm(&(&g.a * real(s))).iter().copied().collect(),
        0.0,
        t,
        4,
        1e-13 * t,
        QUAD_MAX_PANELS,
    )?;
    let m = CMat::from_iterator(n, n, r.value.into_iter()) * real(1.0 / t);
    g.wrap(m)
}

/// `t^m A^m T_t`.
pub fn derivative_family(g: &GeneratorModel, t: f64, m: u32) -> Result<MatrixOperator> {
    check_time(t, false)?;
    let mut out = linalg::expm(&(&g.a * real(t)));
    for _ in 0..m {
        out = &g.a * out * real(t);
    }
    g.wrap(out)
}

/// Grid suprema of `‖T_t‖_p` and `‖tAT_t‖_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticProfile {
    pub c0: f64,
    pub c1: f64,
    pub grid_points: usize,
    pub t_min: f64,
    pub t_max: f64,
    /// Suprema over a finite grid bound the true ones from below.
    pub grid_lower_estimate: bool,
}

/// Logarithmic grid with `per_decade` points per decade on `[10^lo, 10^hi]`.
pub fn log_grid(lo_exp: i32, hi_exp: i32, per_decade: usize) -> Vec<f64> {
    let steps = (hi_exp - lo_exp) as usize * per_decade;
    (0..=steps)
        .map(|k| 10f64.powf(lo_exp as f64 + k as f64 / per_decade as f64))
        .collect()
}

/// 200 points per decade on `[1e-3, 1e3]`.
pub fn default_time_grid() -> Vec<f64> {
    log_grid(-3, 3, 200)
}

pub fn analytic_profile(g: &GeneratorModel, p: f64, grid: &[f64]) -> Result<AnalyticProfile> {
    if grid.is_empty() {
        return Err(Error::Parameter("time grid must be nonempty".into()));
    }
    if let Some(t) = grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::Parameter(format!("time grid points must be positive, got {t}")));
    }
    if p.is_nan() || p < 1.0 {
        return Err(Error::Parameter(format!("p must lie in [1, ∞], got {p}")));
    }
    let w = g.space.weights();
    let opts = PnormOptions { samples: 4, ascent_steps: 10, ..PnormOptions::default() };
    let vals = par::map(grid, |&t| {
        let tt = linalg::expm(&(&g.a * real(t)));
        let d = &g.a * &tt * real(t);
        (pnorm_matrix(&tt, w, p, &opts).upper, pnorm_matrix(&d, w, p, &opts).upper)
    });
    let (c0, c1) = vals.iter().fold((0.0f64, 0.0f64), |(a, b), &(x, y)| (a.max(x), b.max(y)));
    Ok(AnalyticProfile {
        c0,
        c1,
        grid_points: grid.len(),
        t_min: grid.iter().copied().fold(f64::INFINITY, f64::min),
        t_max: grid.iter().copied().fold(0.0, f64::max),
        grid_lower_estimate: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubordinationMethod {
    Spectral,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinationSpec {
    pub alpha: f64,
    pub t: f64,
    pub method: SubordinationMethod,
    /// Initial number of quadrature panels before adaptive refinement.
    pub quadrature_nodes: usize,
}

impl SubordinationSpec {
    pub fn new(alpha: f64, t: f64, method: SubordinationMethod) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        check_time(t, false)?;
        Ok(Self { alpha, t, method, quadrature_nodes: 64 })
    }
}

#[derive(Debug, Clone)]
pub struct Subordinated {
    pub operator: MatrixOperator,
    pub method: SubordinationMethod,
    /// Integrand evaluations (quadrature) or 0 (spectral).
    pub nodes_used: usize,
    /// Density mass left outside the integration window.
    pub tail_mass: f64,
    /// Density mass captured by the quadrature rule.
    pub weight_sum: f64,
    /// Summed Kronrod error estimate (0 for the spectral method).
    pub quadrature_error: f64,
}

/// `f_{1/2,t}(s) = t (4π)^{-1/2} s^{-3/2} e^{-t²/(4s)}`.
pub fn half_stable_density(t: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    t / (4.0 * std::f64::consts::PI).sqrt() * s.powf(-1.5) * (-t * t / (4.0 * s)).exp()
}

/// `∫_0^S f_{1/2,t}(s) ds = erfc(t / (2√S))`.
pub fn half_stable_cdf(t: f64, s: f64) -> f64 {
    libm::erfc(t / (2.0 * s.sqrt()))
}

fn spectral_check(g: &GeneratorModel) -> Result<linalg::EigenDecomposition> {
    let eig = linalg::eigen_decompose(&g.a, crate::analyticity::EIGEN_COND_LIMIT).map_err(|e| match e {
        Error::Degeneracy(m) => Error::Precondition(format!("generator is not safely diagonalizable: {m}")),
        other => other,
    })?;
    let scale = linalg::max_abs(&g.a).max(1.0);
    if let Some(l) = eig.values.iter().find(|l| l.re > 1e-9 * scale) {
        return Err(Error::Precondition(format!("generator has eigenvalue {l} in the right half-plane")));
    }
    Ok(eig)
}

/// Principal-branch `(−λ)^α`, with round-off that strays across the imaginary axis snapped back.
fn frac_power(lam: Complex64, alpha: f64) -> Complex64 {
    let mut z = -lam;
    if z.re < 0.0 {
        z.re = 0.0;
    }
    if z.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    z.powf(alpha)
}

/// Generator `−(−A)^α` of the subordinated semigroup.
pub fn fractional_generator(g: &GeneratorModel, alpha: f64) -> Result<GeneratorModel> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let eig = spectral_check(g)?;
    let m = eig.apply(|l| -frac_power(l, alpha));
    let m = if g.is_real() { m.map(|z| real(z.re)) } else { m };
    GeneratorModel::new(m, g.space.clone())
}

/// First doubling time `s ≤ s_max` after which `e^{sA}` stops changing, with that value.
fn settled_semigroup(a: &CMat, s_max: f64) -> Option<(f64, CMat)> {
    let scale = linalg::max_abs(a);
    if scale == 0.0 {
        return Some((0.0, linalg::identity(a.nrows())));
    }
    let mut s = 1.0 / scale;
    let mut e = linalg::expm(&(a * real(s)));
    while s <= s_max && s * scale <= EXPM_RANGE {
        let e2 = &e * &e;
        if linalg::max_abs(&(&e2 - &e)) <= SETTLE_TOL * linalg::max_abs(&e).max(1.0) {
            return Some((s, e));
        }
        e = e2;
        s *= 2.0;
    }
    None
}

/// `T_{α,t} = ∫_0^∞ f_{α,t}(s) T_s ds = e^{−t(−A)^α}`.
pub fn subordinate(g: &GeneratorModel, spec: &SubordinationSpec) -> Result<Subordinated> {
    let SubordinationSpec { alpha, t, method, quadrature_nodes } = *spec;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    check_time(t, false)?;
    match method {
        SubordinationMethod::Spectral => {
            let eig = spectral_check(g)?;
            let m = eig.apply(|l| (-frac_power(l, alpha) * t).exp());
            Ok(Subordinated { operator: g.wrap(m)?, method, nodes_used: 0, tail_mass: 0.0, weight_sum: 1.0, quadrature_error: 0.0 })
        }
        SubordinationMethod::Quadrature => {
            if alpha != 0.5 {
                return Err(Error::Parameter("quadrature subordination needs alpha = 1/2".into()));
            }
            let n = g.dim();
            let s_lo = t * t / (4.0 * LOWER_TAIL_X * LOWER_TAIL_X);
            let s_hi = t * t / (4.0 * UPPER_TAIL_X * UPPER_TAIL_X);
            let tail_mass = half_stable_cdf(t, s_lo) + libm::erf(t / (2.0 * s_hi.sqrt()));
            // beyond s_mid the semigroup equals its limit and that stretch integrates in closed form
            let (s_mid, limit) = match settled_semigroup(&g.a, s_hi) {
                Some((s, e)) => (s.clamp(s_lo, s_hi), Some(e)),
                None if s_hi * linalg::max_abs(&g.a) > EXPM_RANGE => {
                    return Err(Error::Numeric(
                        "semigroup does not settle inside the quadrature window; use the spectral method".into(),
                    ))
                }
                None => (s_hi, None),
            };
            let mut m = CMat::zeros(n, n);
            let mut weight_sum = 0.0;
            let mut nodes_used = 0;
            let mut quadrature_error = 0.0;
            if s_mid > s_lo {
                // s = e^u, ds = s du
                let r = quad::integrate(
                    |u| {
                        let s = u.exp();
                        let w = half_stable_density(t, s) * s;
                        let e = linalg::expm(&(&g.a * real(s)));
                        let mut v: Vec<Complex64> = e.iter().map(|z| z * w).collect();
                        v.push(real(w));
                        v
                    },
                    s_lo.ln(),
                    s_mid.ln(),
                    quadrature_nodes.max(1),
                    QUAD_TOL,
                    QUAD_MAX_PANELS,
                )?;
                weight_sum = r.value[n * n].re;
                m = CMat::from_iterator(n, n, r.value.iter().copied().take(n * n));
                nodes_used = r.evaluations;
                quadrature_error = r.error;
            }
            if let Some(e) = limit {
                let mass = libm::erf(t / (2.0 * s_mid.sqrt())) - libm::erf(t / (2.0 * s_hi.sqrt()));
                m += e * real(mass);
                weight_sum += mass;
            }
            Ok(Subordinated { operator: g.wrap(m)?, method, nodes_used, tail_mass, weight_sum, quadrature_error })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(v: &[f64]) -> GeneratorModel {
        let n = v.len();
        let a = CMat::from_fn(n, n, |i, j| if i == j { real(v[i]) } else { real(0.0) });
        GeneratorModel::new(a, MeasureSpace::uniform(n)).unwrap()
    }

    fn walk_generator() -> GeneratorModel {
        let rows = vec![
            vec![0.5, 0.25, 0.0, 0.25],
            vec![0.25, 0.5, 0.25, 0.0],
            vec![0.0, 0.25, 0.5, 0.25],
            vec![0.25, 0.0, 0.25, 0.5],
        ];
        let t = MatrixOperator::from_real_rows(&rows, MeasureSpace::uniform(4)).unwrap();
        GeneratorModel::markov_generator_from(&t)
    }

    #[test]
    fn evolve_examples() {
        let g = diag(&[-1.0]);
        assert_abs_diff_eq!(evolve(&g, 1.0).unwrap().matrix()[(0, 0)].re, (-1f64).exp(), epsilon = 1e-15);
        let w = walk_generator();
        assert!(w.is_markov());
        assert!(linalg::max_abs(&(evolve(&w, 0.0).unwrap().matrix() - linalg::identity(4))) == 0.0);
        let a = evolve(&w, 0.7).unwrap();
        let b = evolve(&w, 1.9).unwrap();
        let c = evolve(&w, 2.6).unwrap();
        assert!(linalg::max_abs(&(a.matrix() * b.matrix() - c.matrix())) < 1e-10);
        assert!(c.flags().row_stochastic);
        assert!(evolve(&w, f64::NAN).is_err());
        assert!(evolve(&w, -1.0).is_err());
    }

    #[test]
    fn average_examples() {
        let zero = diag(&[0.0, 0.0]);
        assert!(linalg::max_abs(&(continuous_average(&zero, 3.0).unwrap().matrix() - linalg::identity(2))) < 1e-15);
        let g = diag(&[-1.0]);
        for t in [1e-6, 0.3, 5.0] {
            let v = continuous_average(&g, t).unwrap().matrix()[(0, 0)].re;
            assert_abs_diff_eq!(v, -(-t).exp_m1() / t, epsilon = 1e-14);
        }
        let w = walk_generator();
        let phi = continuous_average(&w, 2.5).unwrap();
        let quad = continuous_average_quadrature(&w, 2.5).unwrap();
        assert!(linalg::max_abs(&(phi.matrix() - quad.matrix())) < 1e-9);
    }

    #[test]
    fn derivative_examples() {
        let g = diag(&[-1.0]);
        let t = 1.7;
        let v = derivative_family(&g, t, 1).unwrap().matrix()[(0, 0)].re;
        assert_abs_diff_eq!(v, -t * (-t).exp(), epsilon = 1e-15);
        let w = walk_generator();
        assert!(linalg::max_abs(&(derivative_family(&w, t, 0).unwrap().matrix() - evolve(&w, t).unwrap().matrix())) == 0.0);
    }

    #[test]
    fn profile_examples() {
        let grid = log_grid(-2, 2, 20);
        let zero = diag(&[0.0, 0.0]);
        let pr = analytic_profile(&zero, 2.0, &grid).unwrap();
        assert_abs_diff_eq!(pr.c0, 1.0, epsilon = 1e-14);
        assert_eq!(pr.c1, 0.0);
        let pr = analytic_profile(&diag(&[-1.0]), 2.0, &grid).unwrap();
        assert!(pr.c0 <= 1.0 && pr.c1 <= (-1f64).exp() + 1e-15);
        assert!(analytic_profile(&zero, 2.0, &[]).is_err());
    }

    #[test]
    fn density_mass() {
        for t in [0.1, 1.0, 10.0] {
            let spec = SubordinationSpec::new(0.5, t, SubordinationMethod::Quadrature).unwrap();
            let s = subordinate(&diag(&[0.0]), &spec).unwrap();
            assert!(s.tail_mass < 1e-10);
            assert_abs_diff_eq!(s.weight_sum + s.tail_mass, 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(s.operator.matrix()[(0, 0)].re, s.weight_sum, epsilon = 1e-15);
        }
    }

    #[test]
    fn subordination_examples() {
        let g = diag(&[-1.0]);
        for method in [SubordinationMethod::Spectral, SubordinationMethod::Quadrature] {
            let spec = SubordinationSpec::new(0.5, 1.0, method).unwrap();
            let v = subordinate(&g, &spec).unwrap().operator.matrix()[(0, 0)].re;
            assert_abs_diff_eq!(v, (-1f64).exp(), epsilon = 1e-9);
        }
        let w = walk_generator();
        let sub = |t: f64| {
            let spec = SubordinationSpec::new(0.5, t, SubordinationMethod::Spectral).unwrap();
            subordinate(&w, &spec).unwrap().operator.matrix().clone()
        };
        assert!(linalg::max_abs(&(sub(0.4) * sub(1.1) - sub(1.5))) < 1e-8);
        let bad = diag(&[0.5]);
        let spec = SubordinationSpec::new(0.5, 1.0, SubordinationMethod::Spectral).unwrap();
        assert!(matches!(subordinate(&bad, &spec), Err(Error::Precondition(_))));
        let spec = SubordinationSpec { alpha: 0.3, ..SubordinationSpec::new(0.3, 1.0, SubordinationMethod::Quadrature).unwrap() };
        assert!(matches!(subordinate(&w, &spec), Err(Error::Parameter(_))));
        let mut jordan = CMat::zeros(2, 2);
        jordan[(0, 1)] = real(1.0);
        let j = GeneratorModel::new(jordan, MeasureSpace::uniform(2)).unwrap();
        let spec = SubordinationSpec::new(0.5, 1.0, SubordinationMethod::Spectral).unwrap();
        assert!(matches!(subordinate(&j, &spec), Err(Error::Precondition(_))));
    }
}
