//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p salpsched-core --test acceptance -- --nocapture --test-threads 1`
//! to see them in order.

use std::cell::Cell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salpsched::harness::{run_scenario, summarize, AlgorithmSetup, ScenarioSpec};
use salpsched::optimizer::{run_observed, RunContext};
use salpsched::oracle::{brute_force_optimal, DEFAULT_LIMIT};
use salpsched::salp::mssa_iteration;
use salpsched::{
    c1_schedule, completion_times, decode, generate_instance, lower_bound, makespan, run,
    AlgorithmKind, Assignment, Bounds, FoodSource, InstanceGenSpec, Objective, OptimizerConfig,
    Population, Position, ProblemInstance, RunObserver, SchedulingProblem,
};

fn verdict(id: &str, pass: bool, detail: String) {
    println!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id} failed: {detail}");
}

#[test]
fn ac1_worked_example_completion_time() {
    let inst = ProblemInstance::reference_example();
    let mut a = vec![1; 12];
    for t in [3, 6, 10, 8] {
        a[t - 1] = 2;
    }
    let ct = completion_times(&Assignment(a), &inst).unwrap()[1];
    verdict(
        "AC1 worked example t_complete(2) = 36.67 +- 0.05",
        (ct - 36.67).abs() <= 0.05,
        format!("t_complete(2) = {ct:.6}"),
    );
}

#[test]
fn ac2_c1_schedule() {
    let at0 = c1_schedule(0, 500);
    let at_end = c1_schedule(500, 500);
    let expect_end = 2.0 * (-16.0f64).exp();
    let rel = ((at_end - expect_end) / expect_end).abs();
    let decreasing = (1..=500).all(|l| c1_schedule(l, 500) < c1_schedule(l - 1, 500));
    verdict(
        "AC2 c1 schedule",
        at0 == 2.0 && rel <= 1e-12 && decreasing,
        format!(
            "c1(0)={at0}, c1(L)={at_end:e} (rel err {rel:e}), strictly decreasing={decreasing}"
        ),
    );
}

#[test]
fn ac3_mssa_matches_brute_force_optimum() {
    let mut picker = ChaCha8Rng::seed_from_u64(0xAC3);
    let mut hits = 0;
    let mut below = 0;
    for k in 0..50u64 {
        let n = picker.random_range(3..=8);
        let m = picker.random_range(2..=3);
        let inst = generate_instance(&InstanceGenSpec::new(n, m, 1000 + k)).unwrap();
        let opt = brute_force_optimal(&inst, DEFAULT_LIMIT)
            .unwrap()
            .optimal_makespan;
        let cfg = OptimizerConfig {
            n_pop: 40,
            max_iter: 200,
            ..OptimizerConfig::published_defaults(AlgorithmKind::Mssa, 7000 + k)
        };
        let problem = SchedulingProblem::new(inst.clone());
        let res = run(AlgorithmKind::Mssa, &problem, &cfg).unwrap();
        let got = makespan(&decode(&res.best_position, m), &inst).unwrap();
        assert_eq!(got, res.best_fitness);
        let tol = 1e-9 * opt;
        if (got - opt).abs() <= tol {
            hits += 1;
        }
        if got < opt - tol || got < lower_bound(&inst) - tol {
            below += 1;
        }
    }
    verdict(
        "AC3 MSSA hits the brute-force optimum in >= 45/50",
        hits >= 45 && below == 0,
        format!("optimal in {hits}/50, below oracle or lower bound: {below}"),
    );
}

#[test]
fn ac4_mssa_dominates_ssa_on_first_scenario() {
    let spec = ScenarioSpec {
        name: "first".into(),
        vm_count: 10,
        task_counts: vec![150],
        runs_per_cell: 20,
        base_seed: 2024,
        task_size_range: [10, 45],
        vm_speed_range: [1.0, 4.0],
        fresh_instance_per_run: false,
        algorithms: vec![
            AlgorithmSetup::new(AlgorithmKind::Mssa, 40, 500),
            AlgorithmSetup::new(AlgorithmKind::Ssa, 40, 500),
        ],
    };
    let report = run_scenario(&spec, 4).unwrap();
    let mssa = report.cell(AlgorithmKind::Mssa, 150).unwrap();
    let ssa = report.cell(AlgorithmKind::Ssa, 150).unwrap();
    let wins = mssa
        .runs
        .iter()
        .zip(&ssa.runs)
        .filter(|(a, b)| a.best_makespan < b.best_makespan)
        .count();
    verdict(
        "AC4 MSSA beats SSA (m=10, n=150, 20 paired runs)",
        mssa.stats.mean < ssa.stats.mean && wins >= 15,
        format!(
            "mean MSSA {:.3} vs SSA {:.3}, MSSA wins {wins}/20",
            mssa.stats.mean, ssa.stats.mean
        ),
    );
}

#[test]
fn ac5_traces_are_monotone() {
    let inst = generate_instance(&InstanceGenSpec::new(20, 5, 55)).unwrap();
    let problem = SchedulingProblem::new(inst);
    let mut bad = Vec::new();
    for kind in AlgorithmKind::ALL {
        for seed in 0..10 {
            let cfg = OptimizerConfig {
                max_iter: 200,
                ..OptimizerConfig::published_defaults(kind, seed)
            };
            let r = run(kind, &problem, &cfg).unwrap();
            let monotone = r.trace.windows(2).all(|w| w[1] <= w[0]);
            let min = r.trace.iter().copied().fold(f64::INFINITY, f64::min);
            if !monotone || r.best_fitness != min || r.trace.len() != 200 {
                bad.push(format!("{kind}/{seed}"));
            }
        }
    }
    verdict(
        "AC5 best-so-far traces non-increasing, final = minimum",
        bad.is_empty(),
        format!("50 runs checked, violations: {bad:?}"),
    );
}

#[test]
fn ac6_determinism_sequential_and_parallel() {
    let inst = generate_instance(&InstanceGenSpec::new(30, 6, 66)).unwrap();
    let problem = SchedulingProblem::new(inst);
    let mut mismatches = Vec::new();
    for kind in AlgorithmKind::ALL {
        let cfg = OptimizerConfig {
            max_iter: 100,
            ..OptimizerConfig::published_defaults(kind, 606)
        };
        let a = run(kind, &problem, &cfg).unwrap();
        let b = run(kind, &problem, &cfg).unwrap();
        if !a.same_outcome(&b) {
            mismatches.push(kind.to_string());
        }
    }

    let spec = ScenarioSpec {
        name: "det".into(),
        vm_count: 5,
        task_counts: vec![20, 30],
        runs_per_cell: 4,
        base_seed: 6,
        task_size_range: [10, 45],
        vm_speed_range: [1.0, 4.0],
        fresh_instance_per_run: false,
        algorithms: AlgorithmKind::ALL
            .iter()
            .map(|&k| AlgorithmSetup::new(k, 20, 60))
            .collect(),
    };
    let seq = run_scenario(&spec, 1).unwrap();
    let par = run_scenario(&spec, 4).unwrap();
    let same_cells = seq.cells.len() == par.cells.len()
        && seq.cells.iter().zip(&par.cells).all(|(x, y)| {
            x.algorithm == y.algorithm
                && x.task_count == y.task_count
                && x.runs.iter().zip(&y.runs).all(|(r, s)| r.same_outcome(s))
        });
    verdict(
        "AC6 identical results across repeats and --jobs 1 vs 4",
        mismatches.is_empty() && same_cells && seq.summaries == par.summaries,
        format!("repeat mismatches: {mismatches:?}, sequential == parallel: {same_cells}"),
    );
}

/// Checks every coordinate the optimizer evaluates and every population member
/// after each iteration.
struct BoundsAudit<'a> {
    inner: &'a SchedulingProblem,
    bounds: Bounds,
    checks: Cell<u64>,
    violations: Cell<u64>,
}

impl BoundsAudit<'_> {
    fn check(&self, x: &[f64]) {
        self.checks.set(self.checks.get() + x.len() as u64);
        let bad = x.iter().filter(|c| !self.bounds.contains(**c)).count() as u64;
        self.violations.set(self.violations.get() + bad);
    }
}

impl Objective for BoundsAudit<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn bounds(&self) -> Bounds {
        self.inner.bounds()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.check(x);
        self.inner.evaluate(x)
    }
}

impl RunObserver for &BoundsAudit<'_> {
    fn after_iteration(&mut self, _l: usize, positions: &[Position], best: &FoodSource) {
        for p in positions {
            self.check(p);
        }
        self.check(&best.position);
    }
}

#[test]
fn ac7_bounds_safety() {
    let inst = generate_instance(&InstanceGenSpec::new(20, 5, 77)).unwrap();
    let problem = SchedulingProblem::new(inst);
    let audit = BoundsAudit {
        inner: &problem,
        bounds: Bounds::new(1.0, 5.0).unwrap(),
        checks: Cell::new(0),
        violations: Cell::new(0),
    };
    for kind in AlgorithmKind::ALL {
        let cfg = OptimizerConfig::published_defaults(kind, 7);
        let mut obs = &audit;
        run_observed(kind, &audit, &cfg, &mut obs).unwrap();
    }
    let (checks, violations) = (audit.checks.get(), audit.violations.get());
    verdict(
        "AC7 every post-clamp coordinate within [1, m]",
        checks >= 1_000_000 && violations == 0,
        format!("{checks} coordinate checks, {violations} violations"),
    );
}

struct Flat {
    dim: usize,
    f: fn(&[f64]) -> f64,
}

impl Objective for Flat {
    fn dim(&self) -> usize {
        self.dim
    }
    fn bounds(&self) -> Bounds {
        Bounds::new(1.0, 5.0).unwrap()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

#[test]
fn ac8_tie_swap_semantics() {
    // leader tie: constant fitness everywhere
    let flat = Flat { dim: 2, f: |_| 3.0 };
    let mut ctx = RunContext::new(&flat, 1);
    let mut pop = Population::evaluated(
        vec![Position(vec![2.0, 2.0]), Position(vec![4.0, 4.0])],
        &mut ctx,
    );
    let mut food = FoodSource {
        position: Position(vec![3.0, 3.0]),
        fitness: 3.0,
    };
    mssa_iteration(&mut pop, &mut food, 0.3, 0.0, &mut ctx);
    let leader_swapped =
        food.position == pop.positions[0] && food.position != Position(vec![3.0, 3.0]);

    // follower tie: leader lands in the bad region, follower ties the food
    let split = Flat {
        dim: 2,
        f: |x| if x[0] > 4.5 { 10.0 } else { 3.0 },
    };
    let mut ctx = RunContext::new(&split, 2);
    let mut pop = Population::evaluated(
        vec![Position(vec![5.0, 5.0]), Position(vec![2.0, 2.0])],
        &mut ctx,
    );
    let mut food = FoodSource {
        position: Position(vec![5.0, 5.0]),
        fitness: 3.0,
    };
    mssa_iteration(&mut pop, &mut food, 1e-9, 0.0, &mut ctx);
    let follower_tied = pop.fitnesses[1] == 3.0;
    let follower_kept = food.position == Position(vec![5.0, 5.0]);

    verdict(
        "AC8 leader ties replace the food source, follower ties do not",
        leader_swapped && follower_tied && follower_kept,
        format!(
            "leader tie swapped={leader_swapped}, follower tie observed={follower_tied}, food kept={follower_kept}"
        ),
    );
}

#[test]
fn ac9_summary_of_published_means() {
    let s = summarize(&[308.00, 282.69, 275.05, 271.71]).unwrap();
    verdict(
        "AC9 average of baseline means = 284.36 +- 0.005",
        (s.mean - 284.36).abs() <= 0.005,
        format!("mean {:.4}, std {:.4}", s.mean, s.std),
    );
}
