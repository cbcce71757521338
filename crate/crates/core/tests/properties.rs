mod common;

use opmono::monotone::{self, NodeGrid};
use opmono::psineq;
use opmono::symmat::{self, State, SymMatrix};
use opmono::{DomainInterval, ScalarFunction, Tolerances};
use proptest::prelude::*;

const TOL: Tolerances = Tolerances::DEFAULT;

fn f(s: &str) -> ScalarFunction {
    ScalarFunction::parse(s).unwrap()
}

const MONOTONE: [&str; 5] = ["t", "sqrt(t)", "t^0.3", "t/(1+t)", "log(1+t)"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_round_trips(seed in any::<u64>(), t in -20.0f64..20.0) {
        let e = common::any_expr(4, &mut common::rng(seed));
        let original = ScalarFunction::from_expr(e);
        let reparsed = ScalarFunction::parse(&original.to_string()).unwrap();
        match (original.eval(t), reparsed.eval(t)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{} vs {}: {:?} / {:?}", original, reparsed, a, b),
        }
    }

    #[test]
    fn dual_value_matches_plain_evaluation(seed in any::<u64>(), t in 0.1f64..10.0) {
        let g = ScalarFunction::from_expr(common::positive_expr(3, &mut common::rng(seed)));
        let (v, _) = g.eval_dual(t).unwrap();
        prop_assert_eq!(v.to_bits(), g.eval(t).unwrap().to_bits());
    }

    #[test]
    fn dual_matches_finite_differences(seed in any::<u64>(), t in 0.1f64..10.0) {
        let g = ScalarFunction::from_expr(common::positive_expr(3, &mut common::rng(seed)));
        prop_assert!(common::dual_error(&g, t) <= 1e-5, "{} at {}", g, t);
    }

    #[test]
    fn companion_times_function_is_identity(seed in any::<u64>(), t in 0.1f64..10.0) {
        let g = ScalarFunction::from_expr(common::positive_expr(3, &mut common::rng(seed)));
        let h = g.companion();
        prop_assert!((g.eval(t).unwrap() * h.eval(t).unwrap() - t).abs() <= 1e-12 * t);
        prop_assert_eq!(h.companion().eval(t).unwrap().to_bits(), ScalarFunction::parse(&format!("t/({})", h.source())).unwrap().eval(t).unwrap().to_bits());
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..9) {
        let a = symmat::random_symmetric(n, &mut common::rng(seed)).unwrap();
        let s = a.eig().unwrap();
        prop_assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
        let err = s.reconstruct().sub(&a).unwrap().frobenius();
        prop_assert!(err <= 1e-12 * a.frobenius().max(1.0));
        prop_assert!((s.values.iter().sum::<f64>() - a.trace()).abs() <= 1e-12 * a.frobenius().max(1.0));
    }

    #[test]
    fn frechet_is_linear_in_direction(seed in any::<u64>(), n in 1usize..6, k in -3.0f64..3.0) {
        let mut r = common::rng(seed);
        let a = symmat::random_psd(n, 0.1, 10.0, &mut r).unwrap();
        let c1 = symmat::random_symmetric(n, &mut r).unwrap();
        let c2 = symmat::random_symmetric(n, &mut r).unwrap();
        let g = f("sqrt(t)");
        let lhs = monotone::frechet_derivative(&g, &a, &c1.add(&c2.scale(k)).unwrap()).unwrap();
        let rhs = monotone::frechet_derivative(&g, &a, &c1).unwrap()
            .add(&monotone::frechet_derivative(&g, &a, &c2).unwrap().scale(k)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-10 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn margin_vanishes_on_the_diagonal(seed in any::<u64>(), n in 1usize..6, which in 0usize..5) {
        let a = symmat::random_psd(n, 0.01, 100.0, &mut common::rng(seed)).unwrap();
        let m = psineq::ps_margin(&f(MONOTONE[which]), &State::CanonicalTrace, &a, &a, &TOL).unwrap();
        prop_assert!(m.abs() <= 1e-9 * a.trace().max(1.0));
    }

    #[test]
    fn ordered_pairs_give_twice_the_reduced_margin(seed in any::<u64>(), n in 1usize..6, which in 0usize..5) {
        let (a, b) = symmat::random_ordered_pair(n, &mut common::rng(seed)).unwrap();
        let g = f(MONOTONE[which]);
        let full = psineq::ps_margin(&g, &State::CanonicalTrace, &a, &b, &TOL).unwrap();
        let reduced = psineq::ps_margin_ordered(&g, &State::CanonicalTrace, &a, &b, &TOL).unwrap();
        prop_assert!((full - 2.0 * reduced).abs() <= 1e-9 * b.trace().max(1.0));
    }

    #[test]
    fn padding_leaves_margins_unchanged(seed in any::<u64>(), n in 1usize..5, m in 1usize..4, which in 0usize..5) {
        let mut r = common::rng(seed);
        let (a, b) = symmat::random_ordered_pair(n, &mut r).unwrap();
        let xi: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let g = f(MONOTONE[which]);
        let pa = symmat::direct_sum_pad(&a, m, 1.0).unwrap();
        let pb = symmat::direct_sum_pad(&b, m, 1.0).unwrap();
        let trace = State::CanonicalTrace;
        let base = psineq::ps_margin_ordered(&g, &trace, &a, &b, &TOL).unwrap();
        let padded = psineq::ps_margin_ordered(&g, &trace, &pa, &pb, &TOL).unwrap();
        prop_assert!((base - padded).abs() <= 1e-9 * b.trace().max(1.0));
        let s = State::rank_one(&xi).unwrap();
        let base = psineq::ps_margin_ordered(&g, &s, &a, &b, &TOL).unwrap();
        let padded = psineq::ps_margin_ordered(&g, &s.pad(m).unwrap(), &pa, &pb, &TOL).unwrap();
        prop_assert!((base - padded).abs() <= 1e-9 * b.max_abs().max(1.0));
    }

    #[test]
    fn absolute_value_dominates(seed in any::<u64>(), n in 1usize..6) {
        let mut r = common::rng(seed);
        let a = symmat::random_symmetric(n, &mut r).unwrap();
        let b = symmat::random_symmetric(n, &mut r).unwrap();
        let abs = symmat::abs_diff(&a, &b).unwrap();
        let d = a.sub(&b).unwrap();
        prop_assert!(abs.sub(&d).unwrap().is_psd(1e-8).unwrap());
        prop_assert!(abs.add(&d).unwrap().is_psd(1e-8).unwrap());
    }

    #[test]
    fn operator_monotone_loewner_matrices_are_psd(seed in any::<u64>(), k in 1usize..7, which in 0usize..5) {
        let g = f(MONOTONE[which]);
        let grid = NodeGrid::random(k, &DomainInterval::new(0.01, 100.0).unwrap(), &mut common::rng(seed)).unwrap();
        let l = monotone::loewner_matrix(&g, &grid).unwrap();
        let (lmin, eps) = monotone::loewner_margin(&g, grid.nodes(), &TOL).unwrap();
        prop_assert!(lmin >= -eps, "{} {:?} {}", MONOTONE[which], grid.nodes(), lmin);
        prop_assert_eq!(l.dim(), k);
    }

    #[test]
    fn refining_the_grid_never_raises_the_infimum(k in 2usize..60, extra in 1usize..60, p in 1.1f64..4.0) {
        let g = ScalarFunction::parse(&format!("t^{p}")).unwrap();
        let range = DomainInterval::new(1e-2, 1e2).unwrap();
        let coarse = psineq::trace_condition_inf(&g, &range, k).unwrap();
        let fine = psineq::trace_condition_inf(&g, &range, k + extra).unwrap();
        prop_assert!(fine.value <= coarse.value);
        let (l, m) = fine.argmin_pair;
        prop_assert!((psineq::trace_condition_ratio(&g, l, m).unwrap() - fine.value).abs() <= 1e-12);
    }

    #[test]
    fn matrix_json_round_trips(seed in any::<u64>(), n in 1usize..7) {
        let a = symmat::random_symmetric(n, &mut common::rng(seed)).unwrap().scale(1e3);
        let (back, asym) = SymMatrix::from_json_str(&a.to_json_string()).unwrap();
        prop_assert_eq!(asym, 0.0);
        prop_assert_eq!(back, a);
    }

    #[test]
    fn contraction_norm_at_most_one(seed in any::<u64>(), n in 1usize..7) {
        let c = symmat::random_contraction(n, &mut common::rng(seed)).unwrap();
        prop_assert!(c.spectral_norm().unwrap() <= 1.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn verdicts_independent_of_worker_count(seed in any::<u64>(), n in 2usize..5) {
        let cfg = psineq::PsCheckConfig::new(f("t^2"), n, opmono::TrialBudget::new(300, seed));
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = one.install(|| psineq::check_ps(&cfg)).unwrap();
        let b = many.install(|| psineq::check_ps(&cfg)).unwrap();
        prop_assert_eq!(&a, &b);
        if let Some(w) = &a.witness {
            prop_assert_eq!(w.replay().unwrap().to_bits(), w.margin.to_bits());
        }
    }

    #[test]
    fn histograms_count_every_finished_trial(seed in any::<u64>()) {
        let s = monotone::CheckSettings::new(opmono::TrialBudget::new(100, seed));
        let v = monotone::check_n_monotone(&f("sqrt(t)"), 3, &s).unwrap();
        prop_assert!(v.holds());
        prop_assert_eq!(v.histogram.unwrap().counts.iter().sum::<u64>(), v.trials_run);
    }
}
