//! Pointwise distance of `F x` from its limit along a schedule.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::lp::{kernel_projection, matrix_power, LpVector};
use crate::semigroup::{continuous_average, evolve};

use super::FamilyBase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMode {
    /// `T^n x → P_T x`
    Powers,
    /// `M_n(T) x → P_T x`
    Averages,
    /// `T_t x → P_A x` as `t → ∞`
    ContinuousPowers,
    /// `M_t x → P_A x` as `t → ∞`
    ContinuousAverages,
    /// `T_t x → x` as `t → 0⁺`
    TToZero,
}

impl ConvergenceMode {
    fn is_continuous(self) -> bool {
        !matches!(self, ConvergenceMode::Powers | ConvergenceMode::Averages)
    }
}

fn sup_dist(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `max_λ |(F_s x)(λ) − (limit)(λ)|` for each schedule point `s`.
pub fn pointwise_convergence(base: &FamilyBase, x: &LpVector, mode: ConvergenceMode, schedule: &[f64]) -> Result<Vec<f64>> {
    if x.space().weights() != base.weights() {
        return Err(Error::Input("vector and operator live on different spaces".into()));
    }
    let x0 = x.to_dvector();
    match (base, mode.is_continuous()) {
        (FamilyBase::Discrete(t), false) => {
            let a = t.matrix();
            let proj = kernel_projection(&(linalg::identity(t.dim()) - a))?;
            let limit = &proj * &x0;
            let mut out = Vec::with_capacity(schedule.len());
            for &s in schedule {
                if !(s >= 0.0 && s.fract() == 0.0 && s.is_finite()) {
                    return Err(Error::Parameter(format!("discrete schedule points must be nonnegative integers, got {s}")));
                }
                let n = s as usize;
                let f: CMat = match mode {
                    ConvergenceMode::Powers => matrix_power(a, n),
                    _ => crate::lp::ergodic_average(t, n).matrix().clone(),
                };
                out.push(sup_dist(&(f * &x0), &limit));
            }
            Ok(out)
        }
        (FamilyBase::Continuous(g), true) => {
            let limit = match mode {
                ConvergenceMode::TToZero => x0.clone(),
                _ => kernel_projection(g.matrix())? * &x0,
            };
            let mut out = Vec::with_capacity(schedule.len());
            for &s in schedule {
                let f = match mode {
                    ConvergenceMode::ContinuousAverages => continuous_average(g, s)?,
                    _ => evolve(g, s)?,
                };
                out.push(sup_dist(&(f.matrix() * &x0), &limit));
            }
            Ok(out)
        }
        _ => Err(Error::Input(format!("mode {mode:?} does not match the base operator type"))),
    }
}

/// `2^k` for `k = 0..=k_max`.
pub fn dyadic_schedule(k_max: u32) -> Vec<f64> {
    (0..=k_max).map(|k| 2f64.powi(k as i32)).collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::zoo;
    use crate::lp::{MatrixOperator, MeasureSpace};
    use crate::semigroup::GeneratorModel;

    #[test]
    fn rank_one_average_converges_immediately() {
        let t = MatrixOperator::uniform(CMat::from_element(4, 4, Complex64::new(0.25, 0.0))).unwrap();
        let x = LpVector::from_real(&[1.0, -3.0, 2.0, 0.0], t.space().clone()).unwrap();
        let d = pointwise_convergence(&FamilyBase::Discrete(t), &x, ConvergenceMode::Powers, &[1.0, 2.0, 5.0]).unwrap();
        assert!(d.iter().all(|&v| v < 1e-14));
    }

    #[test]
    fn swap_contrast() {
        let swap = FamilyBase::Discrete(zoo::rotation_shift(2).unwrap());
        let x = LpVector::from_real(&[1.0, -1.0], MeasureSpace::uniform(2)).unwrap();
        let sched = dyadic_schedule(6);
        let pw = pointwise_convergence(&swap, &x, ConvergenceMode::Powers, &sched).unwrap();
        assert!(pw.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        let av = pointwise_convergence(&swap, &x, ConvergenceMode::Averages, &[1.0, 3.0, 7.0]).unwrap();
        assert!(av.iter().all(|&v| v < 1e-14));
        let av = pointwise_convergence(&swap, &x, ConvergenceMode::Averages, &[2.0, 4.0, 8.0]).unwrap();
        for (v, n) in av.iter().zip([2.0, 4.0, 8.0]) {
            assert!((v - 1.0 / (n + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn continuous_modes() {
        let g = GeneratorModel::markov_generator_from(&zoo::lazy_symmetric_walk(5).unwrap());
        let x = LpVector::from_real(&[1.0, 0.0, 0.0, 0.0, 0.0], MeasureSpace::uniform(5)).unwrap();
        let base = FamilyBase::Continuous(g);
        let z = pointwise_convergence(&base, &x, ConvergenceMode::TToZero, &[1e-1, 1e-2, 1e-3]).unwrap();
        assert!(z[2] < z[1] && z[1] < z[0] && z[2] < 1e-3);
        let l = pointwise_convergence(&base, &x, ConvergenceMode::ContinuousPowers, &[1.0, 10.0, 100.0]).unwrap();
        assert!(l[2] < 1e-10 && l[0] > l[1]);
        let a = pointwise_convergence(&base, &x, ConvergenceMode::ContinuousAverages, &[10.0, 100.0]).unwrap();
        assert!(a[1] < a[0]);
        assert!(pointwise_convergence(&base, &x, ConvergenceMode::Powers, &[1.0]).is_err());
    }
}
