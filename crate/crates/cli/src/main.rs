//! `salpsched`: solve scheduling instances, run experiment sweeps, generate
//! instances and compute brute-force optima.
//!
//! Exit codes: 0 on success, 1 for runtime or I/O failures, 2 for usage and
//! validation errors.

mod overrides;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use salpsched::harness::{
    run_scenario, write_report_csv, write_summary_csv, write_traces, ExperimentConfig,
};
use salpsched::optimizer::{trace_file_name, write_trace_csv};
use salpsched::oracle::{brute_force_optimal, DEFAULT_LIMIT};
use salpsched::{
    decode, generate_instance, lower_bound, run, AlgorithmKind, Error, InstanceGenSpec,
    OptimizerConfig, ProblemInstance, SchedulingProblem,
};
use serde_json::Value;

use overrides::{apply_overrides, merge};

#[derive(Parser)]
#[command(
    name = "salpsched",
    version,
    about = "Salp swarm task scheduling for cloud VMs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one instance with one algorithm.
    Solve(SolveArgs),
    /// Run a multi-scenario experiment sweep.
    Scenario(ScenarioArgs),
    /// Generate a random instance file.
    GenInstance(GenArgs),
    /// Exhaustively compute the optimal makespan of a small instance.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct Common {
    /// JSON config document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config field, e.g. `--set max_iter=50` or `--set params.alpha=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file.
    instance: PathBuf,
    #[arg(long, value_parser = parse_algo)]
    algo: AlgorithmKind,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "results")]
    output: PathBuf,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    common: Common,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "results")]
    output: PathBuf,
    /// Also write one convergence trace per run under `<output>/traces`.
    #[arg(long)]
    traces: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    /// Directory to write `<id>.json` into; prints to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    /// Maximum number of assignments to enumerate.
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    limit: u64,
}

fn parse_algo(s: &str) -> Result<AlgorithmKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Command failure mapped to an exit status.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage_error() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Scenario(a) => scenario(a),
        Command::GenInstance(a) => gen_instance(a),
        Command::Oracle(a) => oracle(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Defaults, then the config file, then `--set` overrides, then `--seed`.
fn layered_config(defaults: Value, common: &Common, seed_key: &str) -> Result<Value, Failure> {
    let mut doc = defaults;
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        merge(&mut doc, file);
    }
    apply_overrides(&mut doc, &common.overrides).map_err(Failure::Usage)?;
    if let Some(seed) = common.seed {
        doc[seed_key] = Value::from(seed);
    }
    Ok(doc)
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| {
        Failure::from(Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })
    })
}

fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| {
        Failure::from(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn solve(args: SolveArgs) -> CmdResult {
    let instance = ProblemInstance::load(&args.instance)?;
    let defaults = serde_json::to_value(OptimizerConfig::published_defaults(args.algo, 0))
        .expect("config serializes");
    let doc = layered_config(defaults, &args.common, "seed")?;
    let cfg: OptimizerConfig =
        serde_json::from_value(doc).map_err(|e| Failure::Usage(format!("config: {e}")))?;

    let problem = SchedulingProblem::new(instance.clone());
    let result = run(args.algo, &problem, &cfg)?;
    let assignment = decode(&result.best_position, instance.n_vms());

    ensure_dir(&args.output)?;
    let result_csv = format!(
        "algorithm,seed,makespan,evaluations,assignment\n{},{},{},{},{}\n",
        args.algo, cfg.seed, result.best_fitness, result.evaluations, assignment
    );
    write_file(&args.output.join("result.csv"), &result_csv)?;
    let label = if instance.id().is_empty() {
        "instance"
    } else {
        instance.id()
    };
    write_trace_csv(
        args.output.join(trace_file_name(label, args.algo, 0)),
        &result.trace,
    )?;

    println!("algorithm: {}", args.algo);
    println!("seed: {}", cfg.seed);
    println!("makespan: {}", result.best_fitness);
    println!("lower_bound: {}", lower_bound(&instance));
    println!("evaluations: {}", result.evaluations);
    println!("assignment: {assignment}");
    Ok(())
}

fn scenario(args: ScenarioArgs) -> CmdResult {
    if args.common.config.is_none() {
        return Err(Failure::Usage("scenario requires --config".into()));
    }
    if args.jobs == 0 {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    let doc = layered_config(Value::Object(Default::default()), &args.common, "base_seed")?;
    let experiment: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| Failure::Usage(format!("config: {e}")))?;
    experiment.validate()?;

    ensure_dir(&args.output)?;
    let mut reports = Vec::new();
    let mut failed = 0;
    for spec in experiment.scenario_specs() {
        eprintln!("running scenario {} ({} VMs)", spec.name, spec.vm_count);
        let report = run_scenario(&spec, args.jobs)?;
        for f in &report.failures {
            failed += 1;
            eprintln!(
                "cell failed: scenario {} task_count {} algorithm {}: {}",
                report.scenario, f.task_count, f.algorithm, f.message
            );
        }
        println!("{}", report.table());
        if args.traces {
            write_traces(&report, args.output.join("traces"))?;
        }
        reports.push(report);
    }
    write_report_csv(&reports, args.output.join("scenario_report.csv"))?;
    write_summary_csv(&reports, args.output.join("summary.csv"))?;
    println!(
        "wrote {}",
        args.output.join("scenario_report.csv").display()
    );
    println!("wrote {}", args.output.join("summary.csv").display());
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} cell(s) failed")));
    }
    Ok(())
}

fn gen_instance(args: GenArgs) -> CmdResult {
    let defaults = serde_json::json!({
        "task_size_range": [10, 45],
        "vm_speed_range": [1.0, 4.0],
        "seed": 0,
    });
    let doc = layered_config(defaults, &args.common, "seed")?;
    let spec: InstanceGenSpec =
        serde_json::from_value(doc).map_err(|e| Failure::Usage(format!("instance spec: {e}")))?;
    let instance = generate_instance(&spec)?;
    match &args.output {
        Some(dir) => {
            ensure_dir(dir)?;
            let path = dir.join(format!("{}.json", instance.id()));
            instance.save(&path)?;
            println!("{}", path.display());
        }
        None => print!("{}", instance.to_json()),
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> CmdResult {
    let instance = ProblemInstance::load(&args.instance)?;
    let result = brute_force_optimal(&instance, args.limit)?;
    println!("optimal_makespan: {}", result.optimal_makespan);
    println!("assignment: {}", result.optimal_assignment);
    println!("assignments_searched: {}", result.assignments_searched);
    Ok(())
}
