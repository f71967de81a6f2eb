//! Multi-run experiment harness.
//!
//! A scenario fixes the VM count and sweeps task counts. For every task count
//! one instance is generated and shared by all algorithms and runs; each run
//! gets its own seed hashed from `(base_seed, algorithm, task_count, run)`.
//! Runs may execute on a thread pool, but results are always assembled in
//! `(task_count, algorithm, run)` order so reports do not depend on scheduling.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optimizer::{run, trace_file_name, write_trace_csv, AlgorithmKind, OptimizerConfig};
use crate::problem::{
    decode, generate_instance, Assignment, InstanceGenSpec, ProblemInstance, SchedulingProblem,
};

/// One algorithm entry of an experiment: population, iteration budget and
/// parameter overrides on top of the published defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSetup {
    pub algorithm: AlgorithmKind,
    #[serde(default = "default_n_pop")]
    pub n_pop: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub params: Map<String, Value>,
}

fn default_n_pop() -> usize {
    40
}

fn default_max_iter() -> usize {
    500
}

impl AlgorithmSetup {
    pub fn new(algorithm: AlgorithmKind, n_pop: usize, max_iter: usize) -> Self {
        Self {
            algorithm,
            n_pop,
            max_iter,
            params: Map::new(),
        }
    }

    /// Defaults for the algorithm, overridden by `params`, with `seed`.
    pub fn optimizer_config(&self, seed: u64) -> OptimizerConfig {
        let mut params = self.algorithm.default_params();
        for (k, v) in &self.params {
            params.insert(k.clone(), v.clone());
        }
        OptimizerConfig {
            n_pop: self.n_pop,
            max_iter: self.max_iter,
            params,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub vm_count: usize,
    pub task_counts: Vec<usize>,
    #[serde(default = "default_runs")]
    pub runs_per_cell: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_task_size_range")]
    pub task_size_range: [u64; 2],
    #[serde(default = "default_vm_speed_range")]
    pub vm_speed_range: [f64; 2],
    /// Draw a fresh instance for every run instead of one per task count.
    #[serde(default)]
    pub fresh_instance_per_run: bool,
    pub algorithms: Vec<AlgorithmSetup>,
}

fn default_runs() -> usize {
    20
}

fn default_task_size_range() -> [u64; 2] {
    [10, 45]
}

fn default_vm_speed_range() -> [f64; 2] {
    [1.0, 4.0]
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::config(format!(
                "scenario {:?}: algorithm list is empty",
                self.name
            )));
        }
        let mut seen = BTreeSet::new();
        for a in &self.algorithms {
            if !seen.insert(a.algorithm) {
                return Err(Error::config(format!(
                    "scenario {:?}: algorithm {} listed twice",
                    self.name, a.algorithm
                )));
            }
        }
        if self.runs_per_cell == 0 {
            return Err(Error::config(format!(
                "scenario {:?}: runs_per_cell must be >= 1",
                self.name
            )));
        }
        if self.task_counts.is_empty() {
            return Err(Error::config(format!(
                "scenario {:?}: task_counts is empty",
                self.name
            )));
        }
        if self.vm_count == 0 || self.task_counts.contains(&0) {
            return Err(Error::config(format!(
                "scenario {:?}: VM and task counts must be positive",
                self.name
            )));
        }
        self.gen_spec(self.task_counts[0], 0).validate()
    }

    fn gen_spec(&self, task_count: usize, seed: u64) -> InstanceGenSpec {
        InstanceGenSpec {
            n: task_count,
            m: self.vm_count,
            task_size_range: self.task_size_range,
            vm_speed_range: self.vm_speed_range,
            seed,
        }
    }

    /// The instance run `run` of `task_count` sees.
    pub fn instance_for(&self, task_count: usize, run: usize) -> Result<ProblemInstance> {
        let seed = instance_seed(
            self.base_seed,
            self.vm_count,
            task_count,
            self.fresh_instance_per_run.then_some(run),
        );
        generate_instance(&self.gen_spec(task_count, seed))
    }

    pub fn run_seed(&self, algorithm: AlgorithmKind, task_count: usize, run: usize) -> u64 {
        run_seed(self.base_seed, algorithm, task_count, run)
    }
}

/// A config file: shared settings plus a list of scenarios to expand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_runs")]
    pub runs_per_cell: usize,
    #[serde(default = "default_task_size_range")]
    pub task_size_range: [u64; 2],
    #[serde(default = "default_vm_speed_range")]
    pub vm_speed_range: [f64; 2],
    #[serde(default)]
    pub fresh_instance_per_run: bool,
    pub scenarios: Vec<ScenarioEntry>,
    pub algorithms: Vec<AlgorithmSetup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    pub name: String,
    pub vm_count: usize,
    pub task_counts: Vec<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn scenario_specs(&self) -> Vec<ScenarioSpec> {
        self.scenarios
            .iter()
            .map(|s| ScenarioSpec {
                name: s.name.clone(),
                vm_count: s.vm_count,
                task_counts: s.task_counts.clone(),
                runs_per_cell: self.runs_per_cell,
                base_seed: self.base_seed,
                task_size_range: self.task_size_range,
                vm_speed_range: self.vm_speed_range,
                fresh_instance_per_run: self.fresh_instance_per_run,
                algorithms: self.algorithms.clone(),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::config("no scenarios configured"));
        }
        self.scenario_specs()
            .iter()
            .try_for_each(ScenarioSpec::validate)
    }
}

fn hash_u64(parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

/// Stable per-run seed.
pub fn run_seed(base_seed: u64, algorithm: AlgorithmKind, task_count: usize, run: usize) -> u64 {
    hash_u64(&[
        b"run",
        &base_seed.to_le_bytes(),
        algorithm.as_str().as_bytes(),
        &(task_count as u64).to_le_bytes(),
        &(run as u64).to_le_bytes(),
    ])
}

/// Seed for the generated instance; `run` is only set for fresh-per-run mode.
pub fn instance_seed(
    base_seed: u64,
    vm_count: usize,
    task_count: usize,
    run: Option<usize>,
) -> u64 {
    let run_bytes = run.map(|r| (r as u64).to_le_bytes());
    hash_u64(&[
        b"instance",
        &base_seed.to_le_bytes(),
        &(vm_count as u64).to_le_bytes(),
        &(task_count as u64).to_le_bytes(),
        run_bytes.as_ref().map_or(&[][..], |b| &b[..]),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (n - 1 divisor); 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(raw: &[f64]) -> Result<Summary> {
    if raw.is_empty() {
        return Err(Error::invalid("cannot summarize an empty list"));
    }
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let std = if raw.len() > 1 {
        (raw.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(Summary {
        mean,
        std,
        min: raw.iter().copied().fold(f64::INFINITY, f64::min),
        max: raw.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Percentage by which `mssa_mean` undercuts `baseline_mean`.
pub fn improvement_vs(mssa_mean: f64, baseline_mean: f64) -> Result<f64> {
    if !(baseline_mean > 0.0) {
        return Err(Error::invalid(format!(
            "baseline mean must be positive, got {baseline_mean}"
        )));
    }
    Ok(100.0 * (baseline_mean - mssa_mean) / baseline_mean)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub best_makespan: f64,
    pub best_assignment: Assignment,
    pub evaluations: u64,
    pub wall_ms: f64,
    pub instance_checksum: String,
    pub trace: Vec<f64>,
}

impl RunRecord {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        RunRecord {
            wall_ms: 0.0,
            ..self.clone()
        } == RunRecord {
            wall_ms: 0.0,
            ..other.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub algorithm: AlgorithmKind,
    pub task_count: usize,
    pub runs: Vec<RunRecord>,
    pub stats: Summary,
}

impl CellReport {
    pub fn raw(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.best_makespan).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub algorithm: AlgorithmKind,
    pub task_count: usize,
    pub message: String,
}

/// Cross-algorithm comparison for one task count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskCountSummary {
    pub task_count: usize,
    /// Statistics over the per-algorithm means of every non-MSSA algorithm.
    pub baseline_average: Option<Summary>,
    pub mssa_mean: Option<f64>,
    /// MSSA improvement against each baseline's mean, in percent.
    pub improvement_vs: Vec<(AlgorithmKind, f64)>,
    /// MSSA improvement against `baseline_average.mean`.
    pub improvement_vs_average: Option<f64>,
    /// Arithmetic mean of `improvement_vs`.
    pub mean_improvement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub vm_count: usize,
    pub cells: Vec<CellReport>,
    pub summaries: Vec<TaskCountSummary>,
    pub failures: Vec<CellFailure>,
}

struct Job {
    task_idx: usize,
    algo_idx: usize,
    run: usize,
}

/// Execute one run of `setup` on `spec`'s instance for `task_count`.
pub fn run_cell_once(
    spec: &ScenarioSpec,
    setup: &AlgorithmSetup,
    task_count: usize,
    run_index: usize,
) -> Result<RunRecord> {
    let instance = spec.instance_for(task_count, run_index)?;
    run_on_instance(spec, setup, &instance, task_count, run_index)
}

fn run_on_instance(
    spec: &ScenarioSpec,
    setup: &AlgorithmSetup,
    instance: &ProblemInstance,
    task_count: usize,
    run_index: usize,
) -> Result<RunRecord> {
    let seed = spec.run_seed(setup.algorithm, task_count, run_index);
    let cfg = setup.optimizer_config(seed);
    let problem = SchedulingProblem::new(instance.clone());
    let result = run(setup.algorithm, &problem, &cfg)?;
    Ok(RunRecord {
        run: run_index,
        seed,
        best_makespan: result.best_fitness,
        best_assignment: decode(&result.best_position, instance.n_vms()),
        evaluations: result.evaluations,
        wall_ms: result.wall_time.as_secs_f64() * 1e3,
        instance_checksum: instance.checksum(),
        trace: result.trace,
    })
}

/// Run every (task count, algorithm, run) cell of `spec` on up to `jobs`
/// threads. Structural problems abort up front; per-cell failures (e.g. a bad
/// parameter value) are collected in `failures` and the sweep continues.
pub fn run_scenario(spec: &ScenarioSpec, jobs: usize) -> Result<ScenarioReport> {
    spec.validate()?;

    let shared: Vec<Option<ProblemInstance>> = spec
        .task_counts
        .iter()
        .map(|&tc| {
            if spec.fresh_instance_per_run {
                Ok(None)
            } else {
                spec.instance_for(tc, 0).map(Some)
            }
        })
        .collect::<Result<_>>()?;

    let mut work = Vec::new();
    for task_idx in 0..spec.task_counts.len() {
        for algo_idx in 0..spec.algorithms.len() {
            for run in 0..spec.runs_per_cell {
                work.push(Job {
                    task_idx,
                    algo_idx,
                    run,
                });
            }
        }
    }

    let exec = |job: &Job| -> Result<RunRecord> {
        let tc = spec.task_counts[job.task_idx];
        let setup = &spec.algorithms[job.algo_idx];
        match &shared[job.task_idx] {
            Some(inst) => run_on_instance(spec, setup, inst, tc, job.run),
            None => run_cell_once(spec, setup, tc, job.run),
        }
    };

    let results: Vec<Result<RunRecord>> = if jobs <= 1 {
        work.iter().map(exec).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::config(format!("cannot start {jobs} worker threads: {e}")))?;
        pool.install(|| work.par_iter().map(exec).collect())
    };

    let mut cells = Vec::new();
    let mut failures = Vec::new();
    let mut results = results.into_iter();
    for &task_count in &spec.task_counts {
        for setup in &spec.algorithms {
            let mut runs = Vec::with_capacity(spec.runs_per_cell);
            let mut error = None;
            for r in results.by_ref().take(spec.runs_per_cell) {
                match r {
                    Ok(rec) => runs.push(rec),
                    Err(e) => {
                        error.get_or_insert(e);
                    }
                }
            }
            match error {
                Some(e) => failures.push(CellFailure {
                    algorithm: setup.algorithm,
                    task_count,
                    message: e.to_string(),
                }),
                None => {
                    let raw: Vec<f64> = runs.iter().map(|r| r.best_makespan).collect();
                    cells.push(CellReport {
                        algorithm: setup.algorithm,
                        task_count,
                        stats: summarize(&raw)?,
                        runs,
                    });
                }
            }
        }
    }

    let summaries = spec
        .task_counts
        .iter()
        .map(|&tc| compare_cells(tc, cells.iter().filter(|c| c.task_count == tc)))
        .collect::<Result<_>>()?;

    Ok(ScenarioReport {
        scenario: spec.name.clone(),
        vm_count: spec.vm_count,
        cells,
        summaries,
        failures,
    })
}

fn compare_cells<'a>(
    task_count: usize,
    cells: impl Iterator<Item = &'a CellReport>,
) -> Result<TaskCountSummary> {
    let mut mssa_mean = None;
    let mut baselines = Vec::new();
    for c in cells {
        if c.algorithm == AlgorithmKind::Mssa {
            mssa_mean = Some(c.stats.mean);
        } else {
            baselines.push((c.algorithm, c.stats.mean));
        }
    }
    let baseline_means: Vec<f64> = baselines.iter().map(|b| b.1).collect();
    let baseline_average = if baseline_means.is_empty() {
        None
    } else {
        Some(summarize(&baseline_means)?)
    };
    let mut improvements = Vec::new();
    let mut improvement_vs_average = None;
    let mut mean_improvement = None;
    if let Some(m) = mssa_mean {
        for &(alg, mean) in &baselines {
            improvements.push((alg, improvement_vs(m, mean)?));
        }
        if let Some(avg) = &baseline_average {
            improvement_vs_average = Some(improvement_vs(m, avg.mean)?);
            mean_improvement =
                Some(improvements.iter().map(|i| i.1).sum::<f64>() / improvements.len() as f64);
        }
    }
    Ok(TaskCountSummary {
        task_count,
        baseline_average,
        mssa_mean,
        improvement_vs: improvements,
        improvement_vs_average,
        mean_improvement,
    })
}

impl ScenarioReport {
    pub fn cell(&self, algorithm: AlgorithmKind, task_count: usize) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.algorithm == algorithm && c.task_count == task_count)
    }

    /// Results table: one row per algorithm, task counts descending across.
    pub fn table(&self) -> String {
        let mut tcs: Vec<usize> = self.summaries.iter().map(|s| s.task_count).collect();
        tcs.sort_unstable_by(|a, b| b.cmp(a));
        let mut algos: Vec<AlgorithmKind> = Vec::new();
        for c in &self.cells {
            if !algos.contains(&c.algorithm) {
                algos.push(c.algorithm);
            }
        }
        // baselines first, MSSA after the aggregate rows
        algos.retain(|a| *a != AlgorithmKind::Mssa);
        let has_mssa = self
            .cells
            .iter()
            .any(|c| c.algorithm == AlgorithmKind::Mssa);

        let summary = |tc: usize| self.summaries.iter().find(|s| s.task_count == tc);
        let fmt_opt =
            |v: Option<f64>, suffix: &str| v.map_or("-".to_string(), |x| format!("{x:.2}{suffix}"));

        let mut out = String::new();
        let _ = write!(
            out,
            "{:<28}",
            format!("{} (m={})", self.scenario, self.vm_count)
        );
        for tc in &tcs {
            let _ = write!(out, "{tc:>12}");
        }
        out.push('\n');
        let mut row = |label: &str, value: &dyn Fn(usize) -> String| {
            let _ = write!(out, "{label:<28}");
            for &tc in &tcs {
                let _ = write!(out, "{:>12}", value(tc));
            }
            out.push('\n');
        };
        for a in &algos {
            row(&a.as_str().to_uppercase(), &|tc| {
                fmt_opt(self.cell(*a, tc).map(|c| c.stats.mean), "")
            });
        }
        row("Average", &|tc| {
            fmt_opt(
                summary(tc).and_then(|s| s.baseline_average).map(|b| b.mean),
                "",
            )
        });
        row("STD", &|tc| {
            fmt_opt(
                summary(tc).and_then(|s| s.baseline_average).map(|b| b.std),
                "",
            )
        });
        if has_mssa {
            row("MSSA", &|tc| {
                fmt_opt(summary(tc).and_then(|s| s.mssa_mean), "")
            });
            row("Improvement vs average", &|tc| {
                fmt_opt(summary(tc).and_then(|s| s.improvement_vs_average), "%")
            });
            row("Mean per-baseline improvement", &|tc| {
                fmt_opt(summary(tc).and_then(|s| s.mean_improvement), "%")
            });
        }
        out
    }
}

fn create_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

/// `scenario,vm_count,task_count,algorithm,run,seed,best_makespan,evaluations,wall_ms`
pub fn write_report_csv(reports: &[ScenarioReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create_writer(path)?;
    w.write_record([
        "scenario",
        "vm_count",
        "task_count",
        "algorithm",
        "run",
        "seed",
        "best_makespan",
        "evaluations",
        "wall_ms",
    ])?;
    for rep in reports {
        for cell in &rep.cells {
            for r in &cell.runs {
                w.write_record([
                    rep.scenario.clone(),
                    rep.vm_count.to_string(),
                    cell.task_count.to_string(),
                    cell.algorithm.to_string(),
                    r.run.to_string(),
                    r.seed.to_string(),
                    r.best_makespan.to_string(),
                    r.evaluations.to_string(),
                    format!("{:.3}", r.wall_ms),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `scenario,task_count,algorithm,mean,std,min,max,improvement_vs_mssa_pct`
///
/// Besides one row per algorithm, each task count gets an `average` row
/// (statistics over the baseline means) whose improvement column is MSSA
/// against that average.
pub fn write_summary_csv(reports: &[ScenarioReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create_writer(path)?;
    w.write_record([
        "scenario",
        "task_count",
        "algorithm",
        "mean",
        "std",
        "min",
        "max",
        "improvement_vs_mssa_pct",
    ])?;
    for rep in reports {
        for s in &rep.summaries {
            for cell in rep.cells.iter().filter(|c| c.task_count == s.task_count) {
                let imp = match (cell.algorithm, s.mssa_mean) {
                    (_, None) => String::new(),
                    (AlgorithmKind::Mssa, Some(_)) => "0".to_string(),
                    (alg, Some(_)) => s
                        .improvement_vs
                        .iter()
                        .find(|(a, _)| *a == alg)
                        .map_or(String::new(), |(_, v)| v.to_string()),
                };
                w.write_record([
                    rep.scenario.clone(),
                    s.task_count.to_string(),
                    cell.algorithm.to_string(),
                    cell.stats.mean.to_string(),
                    cell.stats.std.to_string(),
                    cell.stats.min.to_string(),
                    cell.stats.max.to_string(),
                    imp,
                ])?;
            }
            if let Some(avg) = s.baseline_average {
                w.write_record([
                    rep.scenario.clone(),
                    s.task_count.to_string(),
                    "average".to_string(),
                    avg.mean.to_string(),
                    avg.std.to_string(),
                    avg.min.to_string(),
                    avg.max.to_string(),
                    s.improvement_vs_average
                        .map_or(String::new(), |v| v.to_string()),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One `iteration,best_fitness` file per run, named
/// `{scenario}-{task_count}_{algorithm}_{run}.csv`.
pub fn write_traces(report: &ScenarioReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for cell in &report.cells {
        let label = format!("{}-{}", report.scenario, cell.task_count);
        for r in &cell.runs {
            write_trace_csv(
                dir.join(trace_file_name(&label, cell.algorithm, r.run)),
                &r.trace,
            )?;
        }
    }
    Ok(())
}
