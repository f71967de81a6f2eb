//! Salp swarm optimization for static cloud task scheduling.
//!
//! The crate schedules `n` independent tasks onto `m` VMs so as to minimize
//! makespan. Candidate schedules are points in `[1, m]^n`, decoded to VM
//! numbers by rounding. Five population-based optimizers work on that space:
//!
//! * `mssa` - modified salp swarm (half leaders, Gaussian steps, tie swaps)
//! * `ssa` - standard single-leader salp swarm
//! * `ga`, `pso`, `acor` - comparison baselines
//!
//! [`harness`] runs multi-seed experiment sweeps and [`oracle`] provides an
//! exact brute-force optimum for tiny instances.
//!
//! ```
//! use salpsched::{run, AlgorithmKind, OptimizerConfig, ProblemInstance, SchedulingProblem};
//!
//! let problem = SchedulingProblem::new(ProblemInstance::reference_example());
//! let cfg = OptimizerConfig::published_defaults(AlgorithmKind::Mssa, 7);
//! let result = run(AlgorithmKind::Mssa, &problem, &cfg).unwrap();
//! assert_eq!(result.trace.len(), 500);
//! assert!(result.best_fitness >= salpsched::lower_bound(problem.instance()));
//! ```
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod harness;
pub mod optimizer;
pub mod oracle;
pub mod problem;
pub mod salp;

pub use error::{Error, Result};
pub use optimizer::{
    c1_schedule, clamp_to_bounds, run, run_observed, AlgorithmKind, Bounds, C1Variant, FoodSource,
    Objective, OptimizerConfig, Population, RunObserver, RunResult,
};
pub use oracle::{brute_force_optimal, OracleResult};
pub use problem::{
    completion_times, decode, exec_time, generate_instance, lower_bound, makespan, Assignment,
    InstanceGenSpec, Position, ProblemInstance, SchedulingProblem,
};
