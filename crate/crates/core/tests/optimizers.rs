use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salpsched::baselines::GaParams;
use salpsched::{
    decode, generate_instance, makespan, run, AlgorithmKind, InstanceGenSpec, Objective,
    OptimizerConfig, ProblemInstance, SchedulingProblem,
};

/// Straight-line standard SSA written from the update rules, sharing only the
/// RNG stream with the library.
fn reference_ssa(
    inst: &ProblemInstance,
    n_pop: usize,
    iters: usize,
    seed: u64,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, m) = (inst.n_tasks(), inst.n_vms());
    let (lb, ub) = (1.0, m as f64);
    let fit = |x: &[f64]| makespan(&decode(x, m), inst).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<f64>> = (0..n_pop)
        .map(|_| {
            (0..n)
                .map(|_| lb + (ub - lb) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let mut fx: Vec<f64> = x.iter().map(|p| fit(p)).collect();
    let mut best = 0;
    for i in 1..n_pop {
        if fx[i] < fx[best] {
            best = i;
        }
    }
    let (mut food, mut food_fit) = (x[best].clone(), fx[best]);
    let mut trace = Vec::new();
    for l in 1..=iters {
        let c1 = 2.0 * (-(4.0 * l as f64 / iters as f64).powi(2)).exp();
        for i in 0..n_pop {
            for j in 0..n {
                x[i][j] = if i == 0 {
                    let c2: f64 = rng.random();
                    let c3: f64 = rng.random();
                    let step = c1 * ((ub - lb) * c2 + lb);
                    if c3 >= 0.5 {
                        food[j] + step
                    } else {
                        food[j] - step
                    }
                } else {
                    (x[i][j] + x[i - 1][j]) / 2.0
                };
                x[i][j] = x[i][j].max(lb).min(ub);
            }
            fx[i] = fit(&x[i]);
        }
        for i in 0..n_pop {
            if fx[i] < food_fit {
                food_fit = fx[i];
                food = x[i].clone();
            }
        }
        trace.push(food_fit);
    }
    (trace, vec![food])
}

#[test]
fn ssa_matches_reference_trajectory() {
    let inst = ProblemInstance::new("t3v2", vec![18.0, 15.0, 19.0], vec![3.4, 2.4]).unwrap();
    let problem = SchedulingProblem::new(inst.clone());
    for seed in [1, 2, 3, 99] {
        let cfg = OptimizerConfig::published_defaults(AlgorithmKind::Ssa, seed);
        let cfg = OptimizerConfig {
            n_pop: 6,
            max_iter: 5,
            ..cfg
        };
        let got = run(AlgorithmKind::Ssa, &problem, &cfg).unwrap();
        let (trace, food) = reference_ssa(&inst, 6, 5, seed);
        assert_eq!(got.trace, trace, "seed {seed}");
        assert_eq!(got.best_position.0, food[0], "seed {seed}");
        assert_eq!(got.evaluations, 6 * 6);
    }
}

#[test]
fn ssa_no_factor_variant_differs() {
    let inst = generate_instance(&InstanceGenSpec::new(15, 4, 3)).unwrap();
    let problem = SchedulingProblem::new(inst);
    let base = OptimizerConfig {
        max_iter: 50,
        ..OptimizerConfig::published_defaults(AlgorithmKind::Ssa, 5)
    };
    let alt = base.clone().with_param("c1_variant", "no_factor");
    let a = run(AlgorithmKind::Ssa, &problem, &base).unwrap();
    let b = run(AlgorithmKind::Ssa, &problem, &alt).unwrap();
    assert_ne!(a.trace, b.trace);
}

#[test]
fn evaluation_budgets() {
    let inst = generate_instance(&InstanceGenSpec::new(20, 5, 8)).unwrap();
    let problem = SchedulingProblem::new(inst);
    let iters = 25u64;
    for kind in AlgorithmKind::ALL {
        let cfg = OptimizerConfig {
            max_iter: iters as usize,
            ..OptimizerConfig::published_defaults(kind, 1)
        };
        let r = run(kind, &problem, &cfg).unwrap();
        let per_iter = match kind {
            AlgorithmKind::Ga => {
                let p = GaParams::default();
                (p.offspring_count(40) + p.mutant_count(40)) as u64
            }
            _ => 40,
        };
        assert_eq!(r.evaluations, 40 + iters * per_iter, "{kind}");
        assert!(per_iter <= 40 + 32 + 12);
    }
}

#[test]
fn one_iteration_gives_one_trace_entry() {
    let problem = SchedulingProblem::new(ProblemInstance::reference_example());
    for kind in AlgorithmKind::ALL {
        let cfg = OptimizerConfig {
            max_iter: 1,
            ..OptimizerConfig::published_defaults(kind, 3)
        };
        let r = run(kind, &problem, &cfg).unwrap();
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.trace[0], r.best_fitness);
        assert_eq!(problem.evaluate(&r.best_position), r.best_fitness);
    }
}

#[test]
fn missing_or_unknown_parameters_are_config_errors() {
    let problem = SchedulingProblem::new(ProblemInstance::reference_example());
    let bare = OptimizerConfig::new(10, 5, 0);
    for kind in [
        AlgorithmKind::Mssa,
        AlgorithmKind::Ga,
        AlgorithmKind::Pso,
        AlgorithmKind::Acor,
    ] {
        let err = run(kind, &problem, &bare).unwrap_err();
        assert!(matches!(err, salpsched::Error::Config(_)), "{kind}: {err}");
    }
    // standard SSA has no required parameters
    assert!(run(AlgorithmKind::Ssa, &problem, &bare).is_ok());
    let typo =
        OptimizerConfig::published_defaults(AlgorithmKind::Pso, 0).with_param("inertia", 0.5);
    assert!(run(AlgorithmKind::Pso, &problem, &typo).is_err());
    let tiny = OptimizerConfig::new(1, 5, 0);
    assert!(run(AlgorithmKind::Ssa, &problem, &tiny).is_err());
}

#[test]
fn mssa_not_worse_than_ssa_on_reference_example() {
    let problem = SchedulingProblem::new(ProblemInstance::reference_example());
    let lb = salpsched::lower_bound(problem.instance());
    let mut mssa = 0.0;
    let mut ssa = 0.0;
    for seed in 0..5 {
        let m = run(
            AlgorithmKind::Mssa,
            &problem,
            &OptimizerConfig::published_defaults(AlgorithmKind::Mssa, seed),
        )
        .unwrap();
        let s = run(
            AlgorithmKind::Ssa,
            &problem,
            &OptimizerConfig::published_defaults(AlgorithmKind::Ssa, seed),
        )
        .unwrap();
        assert!(m.best_fitness >= lb && s.best_fitness >= lb);
        mssa += m.best_fitness;
        ssa += s.best_fitness;
    }
    assert!(mssa <= ssa);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn runs_are_monotone_deterministic_and_bounded(seed in any::<u64>(), algo in 0usize..5) {
        let kind = AlgorithmKind::ALL[algo];
        let inst = generate_instance(&InstanceGenSpec::new(12, 4, seed % 97)).unwrap();
        let problem = SchedulingProblem::new(inst);
        let cfg = OptimizerConfig {
            n_pop: 12,
            max_iter: 40,
            ..OptimizerConfig::published_defaults(kind, seed)
        };
        let a = run(kind, &problem, &cfg).unwrap();
        let b = run(kind, &problem, &cfg).unwrap();
        prop_assert!(a.same_outcome(&b));
        prop_assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*a.trace.last().unwrap(), a.best_fitness);
        prop_assert!(a.best_position.iter().all(|&c| (1.0..=4.0).contains(&c)));
        prop_assert!(a.best_fitness >= salpsched::lower_bound(problem.instance()) * (1.0 - 1e-12));
    }
}
