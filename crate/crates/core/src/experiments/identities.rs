//! Algebraic identities for discrete differences and the cyclic transference check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat};
use crate::lp::{difference_matrix, matrix_power, MatrixOperator};

use super::zoo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "identity", rename_all = "snake_case")]
pub enum Telescoping {
    /// `Δ_N^m − Δ_n^m = Σ_{j=n}^{N−1} Δ_j^{m+1}`
    Sum { n: usize, big_n: usize, m: i32 },
    /// The weighted rearrangement of `n^m Δ_{2n+1}^m` into `(j+1)Δ_j^{m+1}` sums.
    Weighted { n: usize, m: i32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelescopingResult {
    pub max_defect: f64,
    /// Largest entry of either side (at least 1).
    pub scale: f64,
}

impl TelescopingResult {
    pub fn relative(&self) -> f64 {
        self.max_defect / self.scale
    }
}

fn delta(t: &CMat, n: usize, m: i32) -> Result<CMat> {
    difference_matrix(t, n, m)
}

pub fn telescoping_check(t: &MatrixOperator, which: Telescoping) -> Result<TelescopingResult> {
    let a = t.matrix();
    let (lhs, rhs) = match which {
        Telescoping::Sum { n, big_n, m } => {
            if n >= big_n {
                return Err(Error::Parameter(format!("need n < N, got n = {n}, N = {big_n}")));
            }
            if m < -1 {
                return Err(Error::Parameter(format!("difference order must be >= -1, got {m}")));
            }
            let lhs = delta(a, big_n, m)? - delta(a, n, m)?;
            // Δ_j^{m+1} = T^j (T − I)^{m+1}, accumulated along j
            let mut term = delta(a, n, m + 1)?;
            let mut rhs = term.clone();
            for _ in n + 1..big_n {
                term = a * term;
                rhs += &term;
            }
            (lhs, rhs)
        }
        Telescoping::Weighted { n, m } => {
            if n < 1 || m < 0 {
                return Err(Error::Parameter(format!("need n >= 1 and m >= 0, got n = {n}, m = {m}")));
            }
            let nf = n as f64;
            let lhs = delta(a, 2 * n + 1, m)? * real(nf.powi(m));
            let c = real(nf.powi(m - 1));
            let mut term = delta(a, n, m + 1)?;
            let mut sum = &term * real(nf + 1.0);
            for j in n + 1..=2 * n {
                term = a * term;
                sum += &term * real(j as f64 + 1.0);
            }
            let big = delta(a, 2 * n + 1, m)?;
            let small = delta(a, n, m)?;
            let rhs = (sum - (big - small) * real(nf + 1.0) + delta(a, 2 * n + 1, m - 1)? - delta(a, n + 1, m - 1)?) * c;
            (lhs, rhs)
        }
    };
    let max_defect = linalg::max_abs(&(&lhs - &rhs));
    let scale = linalg::max_abs(&lhs).max(linalg::max_abs(&rhs)).max(1.0);
    Ok(TelescopingResult { max_defect, scale })
}

/// Finitely supported kernel on `Z`: `h = Σ_j values[j] δ_{offsets[j]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub offsets: Vec<i64>,
    pub values: Vec<Complex64>,
}

impl Kernel {
    pub fn new(offsets: Vec<i64>, values: Vec<Complex64>) -> Result<Self> {
        if offsets.len() != values.len() || offsets.is_empty() {
            return Err(Error::Input("kernel needs matching, nonempty offset and value lists".into()));
        }
        Ok(Self { offsets, values })
    }

    /// `ĥ(θ) = Σ_j h_j e^{ijθ}`.
    pub fn symbol(&self, theta: f64) -> Complex64 {
        self.offsets.iter().zip(&self.values).map(|(&j, &h)| h * Complex64::from_polar(1.0, j as f64 * theta)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferenceResult {
    /// `‖Σ_j h_j U^j‖₂` with `U` the cyclic shift on `Z_N`.
    pub lhs: f64,
    /// `sup |ĥ|` over a circle grid containing the `N`-th roots of unity.
    pub rhs: f64,
    pub ok: bool,
    pub grid_points: usize,
}

pub const TRANSFERENCE_OVERSAMPLING: usize = 64;

pub fn transference_check_p2(h: &Kernel, n: usize) -> Result<TransferenceResult> {
    if n == 0 {
        return Err(Error::Input("cycle length must be positive".into()));
    }
    if let Some(j) = h.offsets.iter().find(|&&j| 2 * j.unsigned_abs() >= n as u64) {
        return Err(Error::Input(format!("kernel offset {j} lies outside (-N/2, N/2) for N = {n}")));
    }
    let u = zoo::rotation_shift(n)?;
    let mut k = CMat::zeros(n, n);
    for (&j, &v) in h.offsets.iter().zip(&h.values) {
        let e = j.rem_euclid(n as i64) as usize;
        k += matrix_power(u.matrix(), e) * v;
    }
    let lhs = linalg::spectral_norm(&k);
    let grid_points = TRANSFERENCE_OVERSAMPLING * n;
    let rhs = (0..grid_points)
        .map(|l| h.symbol(2.0 * PI * l as f64 / grid_points as f64).norm())
        .fold(0.0, f64::max);
    Ok(TransferenceResult { lhs, rhs, ok: lhs <= rhs + 1e-9, grid_points })
}
