use invlearn_core::solvers::solve_il;
use invlearn_experiments::{
    generate_instance, run_batch, spearman, write_metrics_csv, BatchOptions, BenchConfig, InstanceSpec, ModelSpec, Scenario,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Noise-free il-assumption data sits on a rationalizable face, so IL
    /// reproduces `x*` exactly.
    #[test]
    fn zero_noise_il_recovers_truth(seed in any::<u64>(), n in 2usize..=5, b in 1usize..=5) {
        let spec = InstanceSpec { binding: b.min(n), ..InstanceSpec::new(seed, n, Scenario::IlAssumption) };
        let inst = generate_instance(&spec).unwrap();
        let s = solve_il(&inst.problem).unwrap();
        prop_assert!(s.loss <= 1e-10, "{}", s.loss);
        prop_assert!(inst.distance(&s.point) <= 1e-6);
    }

    #[test]
    fn generated_truth_is_feasible_and_rationalized(seed in any::<u64>(), io in any::<bool>(), noise in 0.0f64..0.3) {
        let scenario = if io { Scenario::IoAssumption } else { Scenario::IlAssumption };
        let spec = InstanceSpec { binding: 2, noise, ..InstanceSpec::new(seed, 4, scenario) };
        let inst = generate_instance(&spec).unwrap();
        let region = &inst.problem.region;
        prop_assert!(inst.theta_star.iter().all(|t| *t >= -1e-12));
        prop_assert!((inst.theta_star.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let count = inst.problem.observations.count();
        prop_assert!((2..=8).contains(&count));
        for x in &inst.truth {
            prop_assert!(region.contains(x, 1e-7));
            prop_assert!(invlearn_experiments::evaluate_recovery(&inst, x));
        }
    }
}

#[test]
fn mgil_losses_are_monotone_in_r() {
    let specs: Vec<InstanceSpec> =
        [0.0, 0.2].iter().map(|&noise| InstanceSpec { noise, binding: 2, ..InstanceSpec::new(11, 5, Scenario::IlAssumption) }).collect();
    let models: Vec<ModelSpec> = (1..=5).map(ModelSpec::Mgil).collect();
    let rows = run_batch(&specs, &models, 10, &BatchOptions::default()).unwrap();
    for chunk in rows.chunks(models.len()) {
        let losses: Vec<f64> = chunk.iter().map(|r| r.loss.unwrap()).collect();
        assert!(losses.windows(2).all(|w| w[1] >= w[0] - 1e-7), "{losses:?}");
    }
}

#[test]
fn recovery_rises_with_r_under_knowledge() {
    let specs: Vec<InstanceSpec> = (0..100)
        .map(|seed| InstanceSpec { binding: 3, knowledge: 3, noise: 0.05, ..InstanceSpec::new(seed, 4, Scenario::IlAssumption) })
        .collect();
    let models: Vec<ModelSpec> = (1..=4).flat_map(|r| [ModelSpec::Gil(r), ModelSpec::Mgil(r)]).collect();
    let rows = run_batch(&specs, &models, 1, &BatchOptions::default()).unwrap();
    let r: Vec<f64> = rows.iter().map(|row| row.r.unwrap() as f64).collect();
    let hit: Vec<f64> = rows.iter().map(|row| f64::from(u8::from(row.recovered))).collect();
    let s = spearman(&r, &hit).unwrap();
    assert!(s.rho > 0.0 && s.p_value < 0.05, "{s:?}");
}

#[test]
fn bench_config_runs_deterministically() {
    let cfg = BenchConfig::parse(
        r#"
seed = 5
repetitions = 3
n = [3]
scenarios = ["il-assumption", "io-assumption"]
noise = [0.0, 0.2]
knowledge = [1]
models = ["il", "gil(2)", "mgil(2)", "baseline"]
"#,
    )
    .unwrap();
    let render = || {
        let rows = run_batch(&cfg.specs(), &cfg.models, cfg.repetitions, &cfg.options).unwrap();
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &rows, false).unwrap();
        buf
    };
    let a = render();
    assert_eq!(a, render());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 2 * 2 * 3 * 4);
}
