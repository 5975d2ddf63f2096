mod common;

use common::close;
use invlearn_core::geometry::ParameterPolytope;
use invlearn_core::model::{ConstraintHierarchy, InverseProblem, LossKind, ObservationSummary};
use invlearn_core::numeric::linalg::dot;
use invlearn_core::numeric::solve_lp;
use invlearn_core::solvers::{
    brute_force_gil_oracle, brute_force_oracle, default_epsilon, run_mgil, solve_gil, solve_il_with, solve_ilo_baseline, GilConfig,
    MgilConfig, SearchMode, SolveError,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dims() -> impl Strategy<Value = InverseProblem> {
    prop_oneof![common::problem_strategy(2), common::problem_strategy(3)]
}

fn hierarchy_dims() -> impl Strategy<Value = InverseProblem> {
    prop_oneof![common::hierarchy_problem_strategy(2), common::hierarchy_problem_strategy(3)]
}

fn forward_optimal(p: &InverseProblem, theta: &[f64], z: &[f64]) -> bool {
    let fwd = solve_lp(&p.region.forward_lp(theta)).unwrap();
    (fwd.objective - dot(theta, z)).abs() < 1e-7
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn il_modes_agree_with_oracle(p in dims()) {
        let oracle = brute_force_oracle(&p).unwrap();
        for mode in [SearchMode::Exhaustive, SearchMode::BestFirst] {
            let s = solve_il_with(&p, mode).unwrap();
            prop_assert!((s.loss - oracle.loss).abs() < 1e-7, "{mode:?}: {} vs {}", s.loss, oracle.loss);
            prop_assert!(close(&s.point, &oracle.point, 1e-6), "{mode:?}: {:?} vs {:?}", s.point, oracle.point);
            prop_assert!((s.loss - p.total_loss(&s.point).unwrap()).abs() < 1e-9);
            prop_assert!(p.region.contains(&s.point, 1e-9));
            prop_assert!(forward_optimal(&p, &s.theta, &s.point));
        }
    }

    #[test]
    fn l1_modes_agree_with_oracle(p in dims()) {
        let p = p.with_loss(LossKind::L1);
        let oracle = brute_force_oracle(&p).unwrap();
        for mode in [SearchMode::Exhaustive, SearchMode::BestFirst] {
            let s = solve_il_with(&p, mode).unwrap();
            prop_assert!((s.loss - oracle.loss).abs() < 1e-7 * (1.0 + oracle.loss));
            prop_assert!((s.loss - p.total_loss(&s.point).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn gil_modes_agree_with_oracle(p in hierarchy_dims(), r in 1usize..=3, half in any::<bool>()) {
        let cap = p.hierarchy.relevant().len().min(p.n());
        let r = 1 + (r - 1) % cap;
        let omega = if half { 0.5 } else { 1.0 };
        let oracle = brute_force_gil_oracle(&p, r, omega, None);
        for mode in [SearchMode::Exhaustive, SearchMode::BestFirst] {
            let s = solve_gil(&p, &GilConfig { r, omega, epsilon: None, mode });
            match (&oracle, s) {
                (Ok(o), Ok(s)) => {
                    prop_assert!((s.score - o.score).abs() < 1e-7 * (1.0 + o.score.abs()), "{mode:?}: {} vs {}", s.score, o.score);
                    prop_assert_eq!(s.subset.as_ref().map(Vec::len), Some(r));
                    prop_assert!(forward_optimal(&p, &s.theta, &s.point));
                }
                (Err(SolveError::Realizability { .. }), Err(SolveError::Realizability { .. })) => {}
                (o, s) => prop_assert!(false, "{mode:?}: oracle {o:?} solver {s:?}"),
            }
        }
    }

    #[test]
    fn traces_are_monotone_nested_and_persistent(p in hierarchy_dims(), seed in any::<u64>()) {
        let p = p.clone().with_hierarchy(ConstraintHierarchy::new(p.hierarchy.relevant().to_vec(), vec![]));
        let t = run_mgil(&p, &MgilConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in t.steps.windows(2) {
            prop_assert!(w[1].loss >= w[0].loss - 1e-7);
            prop_assert!(w[0].active.iter().all(|i| w[1].active.contains(i)));
        }
        for (l, step) in t.steps.iter().enumerate() {
            if step.active.is_empty() {
                continue;
            }
            let pp = ParameterPolytope::from_active(&p.region, step.active.clone(), p.normalization).unwrap();
            if pp.is_empty() {
                continue;
            }
            for theta in pp.sample(&mut rng, 3).unwrap() {
                for later in &t.steps[l..] {
                    prop_assert!(forward_optimal(&p, &theta, &later.point));
                }
            }
        }
    }

    #[test]
    fn gil_dominates_baseline_when_realizable(p in hierarchy_dims()) {
        let base = solve_ilo_baseline(&p, 4, 0).unwrap();
        let z = &base.forward_point;
        let eps = default_epsilon(&p.region);
        let tight: Vec<usize> = p.hierarchy.relevant().iter().copied().filter(|&i| p.region.slack(i, z).abs() < 1e-9).collect();
        let slack_ok = p.hierarchy.relevant().iter().all(|&i| tight.contains(&i) || p.region.slack(i, z) >= eps);
        prop_assume!(!tight.is_empty() && slack_ok && tight.len() <= p.n());
        let s = solve_gil(&p, &GilConfig::new(tight.len())).unwrap();
        prop_assert!(s.loss <= p.total_loss(z).unwrap() + 1e-7);
    }

    #[test]
    fn il_effort_does_not_depend_on_count(p in dims()) {
        let c = p.observations.centroid().to_vec();
        let few = InverseProblem::new(p.region.clone(), ObservationSummary::from_moments(2, c.clone(), 0.5).unwrap());
        let many = InverseProblem::new(p.region.clone(), ObservationSummary::from_moments(10_000, c, 2_500.0).unwrap());
        let a = solve_il_with(&few, SearchMode::BestFirst).unwrap();
        let b = solve_il_with(&many, SearchMode::BestFirst).unwrap();
        prop_assert_eq!(a.stats, b.stats);
        prop_assert_eq!(a.point, b.point);
    }
}
