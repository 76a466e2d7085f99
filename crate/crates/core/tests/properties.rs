use jacobi_lt::commutation::eliminate_all;
use jacobi_lt::eigen::{block_eigen, eigenvalues_outside_band, SpectralPoint};
use jacobi_lt::functional::{beta, g_gamma, k_functional, rhs_scalar, RhsKind};
use jacobi_lt::operator::{JacobiOperator, Operator};
use jacobi_lt::verify::{check, random_operator, InequalityName, RandomOperatorSpec};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn scalar_operator(free_a: bool) -> impl Strategy<Value = JacobiOperator> {
    (1usize..10, -5i64..5).prop_flat_map(move |(len, start)| {
        let a = if free_a {
            Just(vec![-1.0; len]).boxed()
        } else {
            prop::collection::vec(-1.6f64..-0.4, len).boxed()
        };
        (a, prop::collection::vec(-3.0f64..3.0, len))
            .prop_map(move |(a, b)| JacobiOperator::new(start, a, b).unwrap())
    })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn block_spec(seed: u64, block_dim: usize) -> RandomOperatorSpec {
    RandomOperatorSpec {
        block_dim,
        offdiag_jitter: 0.3,
        potential_scale: 1.5,
        seed,
        window_half_width: 3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_json_round_trip(op in scalar_operator(false)) {
        let op = Operator::Scalar(op);
        prop_assert_eq!(Operator::from_json(&op.to_json()).unwrap(), op);
    }

    #[test]
    fn block_json_round_trip(seed in any::<u64>(), m in 1usize..4) {
        let op = random_operator(&block_spec(seed, m), 0).unwrap();
        prop_assert_eq!(Operator::from_json(&op.to_json()).unwrap(), op);
    }

    #[test]
    fn sign_flip_is_involution_with_negated_spectrum(op in scalar_operator(false)) {
        let flipped = op.sign_flip_conjugate();
        prop_assert_eq!(&flipped.sign_flip_conjugate(), &op);
        let ours = sorted(eigenvalues_outside_band(&op, TOL).unwrap().expanded());
        let theirs = sorted(eigenvalues_outside_band(&flipped, TOL).unwrap().expanded().iter().map(|x| -x).collect());
        prop_assert_eq!(ours.len(), theirs.len());
        for (x, y) in ours.iter().zip(&theirs) {
            prop_assert!((x - y).abs() < 1e-8, "{} {}", x, y);
        }
    }

    #[test]
    fn unit_blocks_reproduce_scalar_spectrum(op in scalar_operator(false)) {
        let scalar = sorted(eigenvalues_outside_band(&op, TOL).unwrap().expanded());
        let block = sorted(block_eigen(&op.to_block(), TOL).unwrap().expanded());
        prop_assert_eq!(scalar.len(), block.len());
        for (x, y) in scalar.iter().zip(&block) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs(), "{} {}", x, y);
        }
    }

    #[test]
    fn offdiagonal_rhs_term_is_nonnegative(op in scalar_operator(false)) {
        let r = rhs_scalar(&op, RhsKind::Final, None, false).unwrap();
        prop_assert!(r.offdiag_term >= 0.0);
        prop_assert_eq!(r.total, r.potential_term + r.offdiag_term);
    }

    #[test]
    fn g_three_halves_is_half_the_k_functional(lambda in 2.0f64..50.0) {
        prop_assume!(lambda > 2.0);
        let p = SpectralPoint::from_lambda(lambda, 1).unwrap();
        let g = g_gamma(1.5, lambda, 1e-13).unwrap();
        prop_assert!((g - 0.5 * k_functional(p.k)).abs() <= 1e-9, "{} {}", g, k_functional(p.k));
    }

    #[test]
    fn g_gamma_two_sided_bounds(gamma in 0.6f64..=4.0, lambda in 2.0f64..1000.0) {
        prop_assume!(lambda > 2.0);
        let g = g_gamma(gamma, lambda, 1e-12).unwrap();
        let h = lambda - 2.0;
        prop_assert!(g >= 2.0 * beta(gamma - 0.5, 1.5) * h.powf(gamma));
        prop_assert!(g >= beta(gamma - 0.5, 2.0) * h.powf(gamma + 0.5));
        prop_assert!(g <= beta(gamma - 0.5, 2.0) * lambda.powf(gamma + 0.5));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_scalar_operators_pass_every_check(op in scalar_operator(false), gamma in 0.6f64..3.0) {
        let op = Operator::Scalar(op);
        for name in InequalityName::ALL {
            if name.needs_free_offdiagonal() && !op.has_free_offdiagonal() {
                continue;
            }
            let g = name.needs_gamma().then_some(gamma);
            let report = check(&op, name, g).unwrap();
            prop_assert!(report.passed, "{}: slack {}", name, report.slack);
        }
    }

    #[test]
    fn free_offdiagonal_operators_pass_every_check(op in scalar_operator(true), gamma in 0.6f64..3.0) {
        let op = Operator::Scalar(op);
        for name in InequalityName::ALL {
            let g = name.needs_gamma().then_some(gamma);
            let report = check(&op, name, g).unwrap();
            prop_assert!(report.passed, "{}: slack {}", name, report.slack);
        }
    }

    #[test]
    fn random_block_operators_pass_final_matrix(seed in any::<u64>(), m in 2usize..4) {
        let op = random_operator(&block_spec(seed, m), 0).unwrap();
        let report = check(&op, InequalityName::FinalMatrix, None).unwrap();
        prop_assert!(report.passed, "slack {}", report.slack);
    }

    #[test]
    fn each_chain_step_removes_exactly_one_eigenvalue(op in scalar_operator(false)) {
        let chain = eliminate_all(&op, TOL).unwrap();
        let count = eigenvalues_outside_band(&op, TOL).unwrap().eigenvalue_count();
        let removed: usize = chain.steps.iter().map(|s| s.input_eigenvalue.multiplicity).sum();
        prop_assert_eq!(removed, count);
        for step in &chain.steps {
            prop_assert!(step.removed_only);
            prop_assert!(step.spectrum_mismatch <= 1e-7);
            prop_assert!(step.identity_residuals.within_tolerance());
        }
        prop_assert!(chain.certified_slack >= 0.0);
        prop_assert!(chain.lhs <= chain.rhs + 1e-8 * chain.scale);
    }
}
