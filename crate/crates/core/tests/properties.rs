use num_complex::Complex64;
use proptest::prelude::*;

use qvar::analyticity::{diff_profile, in_stolz_region, normal_spectral_diff_formula, numerical_range_check};
use qvar::experiments::{
    empirical_constant, square_function, transference_check_p2, zoo, ExperimentConfig, FamilyBase, FamilyKind, Kernel,
    NormMode, OperatorFamilySpec,
};
use qvar::linalg::{self, CMat};
use qvar::lp::{
    bochner_variation_norm, ergodic_average, lp_norm_raw, matrix_power, operator_pnorm, pnorm_matrix, PnormOptions,
};
use qvar::semigroup::evolve;
use qvar::variation::{
    jump_count, oscillation_norm, vq_norm, vq_norm_bruteforce, vq_prefix_norms, BlockPartition,
};
use qvar::{GeneratorModel, LpVector, MatrixOperator, MeasureSpace, ScalarSequence, VariationExponent};

fn complex() -> impl Strategy<Value = Complex64> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn sequence(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), 1..=max_len)
}

fn qexp() -> impl Strategy<Value = f64> {
    1.0..8.0f64
}

fn vq(a: &[Complex64], q: f64) -> f64 {
    vq_norm(&ScalarSequence::new(a.to_vec()).unwrap(), VariationExponent::new(q).unwrap())
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Row-stochastic matrix with nonnegative entries.
fn stochastic(n: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(0.0..1.0f64, n * n).prop_map(move |v| {
        let mut m = CMat::from_fn(n, n, |i, j| real(v[i * n + j] + 1e-3));
        for i in 0..n {
            let s: Complex64 = m.row(i).iter().sum();
            for j in 0..n {
                m[(i, j)] /= s;
            }
        }
        m
    })
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1..3.0f64, n)
}

proptest! {
    #[test]
    fn dp_matches_bruteforce(a in sequence(10), q in qexp()) {
        let s = ScalarSequence::new(a).unwrap();
        let q = VariationExponent::new(q).unwrap();
        let dp = vq_norm(&s, q);
        let bf = vq_norm_bruteforce(&s, q).unwrap();
        prop_assert!((dp - bf).abs() <= 1e-10 * bf.max(1.0));
    }

    #[test]
    fn vq_is_a_norm(a in sequence(30), b in sequence(30), c in complex(), q in qexp()) {
        let n = a.len().min(b.len());
        let (a, b) = (&a[..n], &b[..n]);
        let sum: Vec<_> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        let scaled: Vec<_> = a.iter().map(|x| c * x).collect();
        let va = vq(a, q);
        prop_assert!((vq(&scaled, q) - c.norm() * va).abs() <= 1e-9 * va.max(1.0));
        prop_assert!(vq(&sum, q) <= va + vq(b, q) + 1e-9);
    }

    #[test]
    fn vq_decreases_in_q(a in sequence(30), q in qexp(), dq in 0.0..5.0f64) {
        prop_assert!(vq(&a, q + dq) <= vq(&a, q) + 1e-9);
    }

    #[test]
    fn prefix_norms_nondecreasing_and_bound_sup(a in sequence(40), q in qexp()) {
        let pre = vq_prefix_norms(&a, VariationExponent::new(q).unwrap());
        prop_assert!(pre.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let last = *pre.last().unwrap();
        prop_assert!((last - vq(&a, q)).abs() <= 1e-12 * last.max(1.0));
        let sup = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(sup <= 2.0 * last + 1e-9);
    }

    #[test]
    fn jumps_bounded_by_variation(a in sequence(40), q in qexp(), tau in 0.01..4.0f64) {
        let s = ScalarSequence::new(a.clone()).unwrap();
        let n = jump_count(&s, tau).unwrap() as f64;
        prop_assert!(tau.powf(q) * n <= vq(&a, q).powf(q) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn oscillation_is_homogeneous_and_subadditive(a in sequence(30), b in sequence(30), c in complex()) {
        let n = a.len().min(b.len());
        let blocks = BlockPartition::dyadic(n.saturating_sub(1));
        let o = |v: Vec<Complex64>| oscillation_norm(&ScalarSequence::new(v).unwrap(), &blocks).unwrap();
        let oa = o(a[..n].to_vec());
        prop_assert!((o(a[..n].iter().map(|x| c * x).collect()) - c.norm() * oa).abs() <= 1e-9 * oa.max(1.0));
        let sum = a[..n].iter().zip(&b[..n]).map(|(x, y)| x + y).collect();
        prop_assert!(o(sum) <= oa + o(b[..n].to_vec()) + 1e-9);
    }

    #[test]
    fn lp_norms_increase_with_p_on_probability_spaces(x in prop::collection::vec(complex(), 5), w in weights(5), p in 1.0..6.0f64, dp in 0.0..6.0f64) {
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|v| v / total).collect();
        prop_assert!(lp_norm_raw(&x, &w, p) <= lp_norm_raw(&x, &w, p + dp) * (1.0 + 1e-12));
        prop_assert!(lp_norm_raw(&x, &w, p + dp) <= lp_norm_raw(&x, &w, f64::INFINITY) * (1.0 + 1e-12));
    }

    #[test]
    fn holder_inequality(x in prop::collection::vec(complex(), 6), y in prop::collection::vec(complex(), 6), w in weights(6), p in 1.05..8.0f64) {
        let pc = p / (p - 1.0);
        let lhs: f64 = x.iter().zip(&y).zip(&w).map(|((a, b), m)| m * (a * b).norm()).sum();
        prop_assert!(lhs <= lp_norm_raw(&x, &w, p) * lp_norm_raw(&y, &w, pc) * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn bochner_norm_is_subadditive(
        xs in prop::collection::vec(prop::collection::vec(complex(), 3), 2..8),
        w in weights(3), p in 1.0..5.0f64, q in qexp(),
    ) {
        let space = MeasureSpace::new(w).unwrap();
        let q = VariationExponent::new(q).unwrap();
        let traj: Vec<LpVector> = xs.iter().map(|v| LpVector::new(v.clone(), space.clone()).unwrap()).collect();
        let rev: Vec<LpVector> = xs.iter().rev().map(|v| LpVector::new(v.clone(), space.clone()).unwrap()).collect();
        let sum: Vec<LpVector> = traj.iter().zip(&rev).map(|(a, b)| {
            LpVector::new(a.entries().iter().zip(b.entries()).map(|(u, v)| u + v).collect(), space.clone()).unwrap()
        }).collect();
        let lhs = bochner_variation_norm(&sum, p, q).unwrap();
        let rhs = bochner_variation_norm(&traj, p, q).unwrap() + bochner_variation_norm(&rev, p, q).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn averages_of_stochastic_are_stochastic(t in stochastic(5), n in 0usize..40) {
        let op = MatrixOperator::uniform(t).unwrap();
        let m = ergodic_average(&op, n);
        for i in 0..5 {
            let s: Complex64 = m.matrix().row(i).iter().sum();
            prop_assert!((s - real(1.0)).norm() <= 1e-12);
            prop_assert!(m.matrix().row(i).iter().all(|z| z.re >= -1e-15 && z.im == 0.0));
        }
    }

    #[test]
    fn consecutive_averages_identity(t in stochastic(4), n in 1usize..30) {
        // (n+1) M_n = n M_{n-1} + T^n
        let op = MatrixOperator::uniform(t.clone()).unwrap();
        let lhs = ergodic_average(&op, n).matrix() - ergodic_average(&op, n - 1).matrix();
        let rhs = (matrix_power(&t, n) - ergodic_average(&op, n - 1).matrix()) / real(n as f64 + 1.0);
        prop_assert!(linalg::max_abs(&(lhs - rhs)) <= 1e-12);
    }

    #[test]
    fn norm_interval_is_ordered_and_exact_at_two(t in stochastic(4), w in weights(4), p in 1.1..6.0f64) {
        let opts = PnormOptions::default();
        let e = pnorm_matrix(&t, &w, p, &opts);
        prop_assert!(e.lower <= e.upper * (1.0 + 1e-9));
        let two = pnorm_matrix(&t, &w, 2.0, &opts);
        prop_assert!(two.exact && (two.upper - two.lower).abs() <= 1e-12);
    }

    #[test]
    fn semigroup_law(t in stochastic(4), s in 0.0..3.0f64, u in 0.0..3.0f64) {
        let g = GeneratorModel::markov_generator_from(&MatrixOperator::uniform(t).unwrap());
        let a = evolve(&g, s + u).unwrap();
        let b = evolve(&g, s).unwrap().matrix() * evolve(&g, u).unwrap().matrix();
        prop_assert!(linalg::max_abs(&(a.matrix() - b)) <= 1e-12);
    }

    #[test]
    fn normal_profile_matches_spectral_formula(radii in prop::collection::vec(0.0..1.0f64, 4), args in prop::collection::vec(-0.6..0.6f64, 4)) {
        // eigenvalues 1 - r e^{iφ} shrunk into the unit disc stay in a Stolz region
        let spectrum: Vec<Complex64> = radii.iter().zip(&args).map(|(r, a)| {
            let z = real(1.0) - Complex64::from_polar(*r, *a);
            z / real(z.norm().max(1.0))
        }).collect();
        let t = zoo::diagonal_normal(&spectrum).unwrap();
        let prof = diff_profile(&t, 2.0, 60).unwrap();
        let formula = normal_spectral_diff_formula(&t, 60).unwrap();
        for (a, b) in prof.upper.iter().zip(&formula) {
            prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn numerical_range_in_stolz_region_contains_spectrum(t in stochastic(4), gamma in 0.2..1.5f64) {
        let op = MatrixOperator::uniform(t.clone()).unwrap();
        let check = numerical_range_check(&op, gamma).unwrap();
        if check.contained {
            for l in linalg::eigenvalues(&t).unwrap() {
                prop_assert!(in_stolz_region(l, gamma, 1e-8));
            }
        }
    }

    #[test]
    fn transference_holds_for_random_kernels(
        taps in prop::collection::vec((-3i64..=3, complex()), 1..5),
        n in prop::sample::select(vec![8usize, 16, 64]),
    ) {
        let (offsets, values): (Vec<i64>, Vec<Complex64>) = taps.into_iter().unzip();
        let r = transference_check_p2(&Kernel::new(offsets, values).unwrap(), n).unwrap();
        prop_assert!(r.ok);
    }

    #[test]
    fn square_function_vanishes_on_fixed_vectors(c in complex(), m in 0u32..3) {
        let t = zoo::lazy_symmetric_walk(6).unwrap();
        let x = LpVector::new(vec![c; 6], t.space().clone()).unwrap();
        let v = square_function(&FamilyBase::Discrete(t), &x, m, 50, 2.0).unwrap();
        prop_assert!(v.phi_value <= 1e-12 * c.norm().max(1.0));
        prop_assert!(v.s_value <= 1e-12 * c.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn empirical_constants_are_deterministic_and_nondecreasing(seed in any::<u64>(), n in 3usize..7) {
        let fam = OperatorFamilySpec::new(
            FamilyKind::ErgodicAverages,
            FamilyBase::Discrete(zoo::random_positive_contraction(n, seed).unwrap()),
            "rpc",
        ).unwrap();
        let mut cfg = ExperimentConfig::new(2.0, NormMode::Variation { q: 3.0 }, vec![4, 8, 16], seed);
        cfg.sample_budget = 24;
        cfg.ascent_steps = 3;
        let a = empirical_constant(&fam, &cfg).unwrap();
        let b = empirical_constant(&fam, &cfg).unwrap();
        prop_assert_eq!(&a.constants, &b.constants);
        prop_assert_eq!(&a.witness, &b.witness);
        prop_assert!(a.constants.windows(2).all(|w| w[0] <= w[1]));
        // averages of a contraction: the v^q constant is at least ‖x‖ itself
        prop_assert!(a.constants[0] >= 1.0 - 1e-12);
        prop_assert!(a.jump_check.as_ref().is_some_and(|j| j.holds));
    }
}

#[test]
fn operator_norm_of_stochastic_is_one_at_infinity() {
    let t = zoo::lazy_symmetric_walk(7).unwrap();
    let e = operator_pnorm(&t, f64::INFINITY).unwrap();
    assert!(e.exact && (e.upper - 1.0).abs() <= 1e-12);
}
