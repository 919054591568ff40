//! Named test operators on uniform probability spaces `Z_N`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real, CMat};
use crate::lp::MatrixOperator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "zoo", rename_all = "snake_case")]
pub enum ZooSpec {
    /// `(1/2)I + (1/4)(S + S^{-1})`.
    LazySymmetricWalk { n: usize },
    /// Cyclic shift `(Sx)_i = x_{i+1}`.
    RotationShift { n: usize },
    /// Circulant `x ↦ ν * x`.
    Convolution { nu: Vec<f64> },
    RandomPositiveContraction { n: usize, seed: u64 },
    DiagonalNormal { spectrum: Vec<Complex64> },
}

impl ZooSpec {
    pub fn id(&self) -> String {
        match self {
            ZooSpec::LazySymmetricWalk { n } => format!("lazy_symmetric_walk({n})"),
            ZooSpec::RotationShift { n } => format!("rotation_shift({n})"),
            ZooSpec::Convolution { nu } => format!("convolution({})", nu.len()),
            ZooSpec::RandomPositiveContraction { n, seed } => format!("random_positive_contraction({n},{seed})"),
            ZooSpec::DiagonalNormal { spectrum } => format!("diagonal_normal({})", spectrum.len()),
        }
    }

    pub fn build(&self) -> Result<MatrixOperator> {
        match self {
            ZooSpec::LazySymmetricWalk { n } => lazy_symmetric_walk(*n),
            ZooSpec::RotationShift { n } => rotation_shift(*n),
            ZooSpec::Convolution { nu } => convolution(nu),
            ZooSpec::RandomPositiveContraction { n, seed } => random_positive_contraction(*n, *seed),
            ZooSpec::DiagonalNormal { spectrum } => diagonal_normal(spectrum),
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Input("zoo operators need N >= 1".into()));
    }
    Ok(())
}

/// Circulant with first column `c`: `T_{ik} = c_{(i-k) mod N}`.
fn circulant(c: &[f64]) -> CMat {
    let n = c.len();
    CMat::from_fn(n, n, |i, k| real(c[(i + n - k) % n]))
}

pub fn lazy_symmetric_walk(n: usize) -> Result<MatrixOperator> {
    check_size(n)?;
    let mut c = vec![0.0; n];
    c[0] += 0.5;
    c[1 % n] += 0.25;
    c[(n - 1) % n] += 0.25;
    MatrixOperator::uniform(circulant(&c))
}

pub fn rotation_shift(n: usize) -> Result<MatrixOperator> {
    check_size(n)?;
    let m = CMat::from_fn(n, n, |i, j| if j == (i + 1) % n { real(1.0) } else { real(0.0) });
    MatrixOperator::uniform(m)
}

pub fn convolution(nu: &[f64]) -> Result<MatrixOperator> {
    check_size(nu.len())?;
    if nu.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Input("convolution kernel must be nonnegative".into()));
    }
    let total: f64 = nu.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Input(format!("convolution kernel must sum to 1, got {total}")));
    }
    MatrixOperator::uniform(circulant(nu))
}

/// Nonnegative matrix scaled so both its row and column sums are at most 1.
pub fn random_positive_contraction(n: usize, seed: u64) -> Result<MatrixOperator> {
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
    let row_max = (0..n).map(|i| raw[i * n..(i + 1) * n].iter().sum::<f64>()).fold(0.0, f64::max);
    let col_max = (0..n).map(|j| (0..n).map(|i| raw[i * n + j]).sum::<f64>()).fold(0.0, f64::max);
    let scale = row_max.max(col_max).max(f64::MIN_POSITIVE);
    MatrixOperator::uniform(CMat::from_fn(n, n, |i, j| real(raw[i * n + j] / scale)))
}

pub fn diagonal_normal(spectrum: &[Complex64]) -> Result<MatrixOperator> {
    check_size(spectrum.len())?;
    let n = spectrum.len();
    MatrixOperator::uniform(CMat::from_fn(n, n, |i, j| if i == j { spectrum[i] } else { real(0.0) }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyticity::{convolution_criterion, stolz_spectrum_check};
    use crate::linalg;
    use crate::lp::operator_pnorm;

    #[test]
    fn lazy_walk_spectrum() {
        let t = lazy_symmetric_walk(4).unwrap();
        let mut e: Vec<f64> = linalg::eigenvalues(t.matrix()).unwrap().iter().map(|z| z.re).collect();
        e.sort_by(f64::total_cmp);
        let expect = [0.0, 0.5, 0.5, 1.0];
        for (a, b) in e.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let f = t.flags();
        assert!(f.row_stochastic && f.normality_defect < 1e-14);
    }

    #[test]
    fn rotation_is_not_analytic() {
        let s = stolz_spectrum_check(&rotation_shift(6).unwrap()).unwrap();
        assert!(s.k_min.is_infinite());
    }

    #[test]
    fn convolution_with_lazy_kernel() {
        let n = 10;
        let mut nu = vec![0.0; n];
        nu[0] = 0.5;
        nu[1] = 0.25;
        nu[n - 1] = 0.25;
        let t = convolution(&nu).unwrap();
        let walk = lazy_symmetric_walk(n).unwrap();
        assert!(linalg::max_abs(&(t.matrix() - walk.matrix())) == 0.0);
        assert!((convolution_criterion(&nu).unwrap().k_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_contraction_norms() {
        let t = random_positive_contraction(7, 3).unwrap();
        assert!(t.flags().nonnegative_entries);
        for p in [1.0, f64::INFINITY] {
            assert!(operator_pnorm(&t, p).unwrap().upper <= 1.0 + 1e-15);
        }
        assert_eq!(t.matrix(), random_positive_contraction(7, 3).unwrap().matrix());
    }

    #[test]
    fn bad_params() {
        assert!(lazy_symmetric_walk(0).is_err());
        assert!(convolution(&[0.5, 0.4]).is_err());
    }
}
