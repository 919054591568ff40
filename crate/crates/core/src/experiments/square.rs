//! Truncated square functions `S(x)` and `Φ_m(x)`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::lp::{lp_norm_of_moduli, LpVector};

use super::FamilyBase;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareFunctionValue {
    /// `‖(Σ_{n≤N} n |M_{n+1}x − M_n x|²)^{1/2}‖_p`
    pub s_value: f64,
    /// `‖(Σ_{n≤N} (n+1)^{2m+1} |Δ_n^{m+1} x|²)^{1/2}‖_p`
    pub phi_value: f64,
    /// Largest pointwise value of the final `Φ_m` summand.
    pub tail_last_term: f64,
    /// Same for `S`.
    pub s_tail_last_term: f64,
}

/// A generator base is sampled at unit time, `T = e^{A}`.
pub(crate) fn discrete_step(base: &FamilyBase) -> CMat {
    match base {
        FamilyBase::Discrete(t) => t.matrix().clone(),
        FamilyBase::Continuous(g) => linalg::expm(g.matrix()),
    }
}

pub fn square_function(base: &FamilyBase, x: &LpVector, m: u32, n_max: usize, p: f64) -> Result<SquareFunctionValue> {
    if n_max > 10_000 {
        return Err(Error::Parameter(format!("square function truncation must be <= 10000, got {n_max}")));
    }
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("p must lie in [1, ∞], got {p}")));
    }
    if x.space().weights() != base.weights() {
        return Err(Error::Input("vector and operator live on different spaces".into()));
    }
    let t = discrete_step(base);
    let dim = t.nrows();
    let w = base.weights();
    let shifted = &t - linalg::identity(dim);
    let x0 = x.to_dvector();

    // Φ_m: z_n = T^n (T − I)^{m+1} x
    let mut z = x0.clone();
    for _ in 0..=m {
        z = &shifted * z;
    }
    let mut phi_sq = vec![0.0f64; dim];
    let mut phi_last = 0.0;
    for n in 0..=n_max {
        if n > 0 {
            z = &t * z;
        }
        let c = (n as f64 + 1.0).powi(2 * m as i32 + 1);
        for (acc, v) in phi_sq.iter_mut().zip(z.iter()) {
            let term = c * v.norm_sqr();
            *acc += term;
            if n == n_max {
                phi_last = f64::max(phi_last, term);
            }
        }
    }

    // S: averages M_n x accumulated alongside
    let mut power: DVector<Complex64> = x0.clone();
    let mut sum = x0.clone();
    let mut prev = x0;
    let mut s_sq = vec![0.0f64; dim];
    let mut s_last = 0.0;
    for n in 0..=n_max {
        power = &t * power;
        sum += &power;
        let next = &sum / Complex64::new(n as f64 + 2.0, 0.0);
        for (i, acc) in s_sq.iter_mut().enumerate() {
            let term = n as f64 * (next[i] - prev[i]).norm_sqr();
            *acc += term;
            if n == n_max {
                s_last = f64::max(s_last, term);
            }
        }
        prev = next;
    }
    Ok(SquareFunctionValue {
        s_value: lp_norm_of_moduli(s_sq.into_iter().map(f64::sqrt), w, p),
        phi_value: lp_norm_of_moduli(phi_sq.into_iter().map(f64::sqrt), w, p),
        tail_last_term: phi_last,
        s_tail_last_term: s_last,
    })
}
