//! Machinery shared by every population-based optimizer: search bounds,
//! population and food-source state, the c1 coefficient schedule, the
//! seeded RNG contract and the common run loop.
//!
//! RNG contract: each run owns exactly one `ChaCha8Rng` seeded from
//! `OptimizerConfig::seed`. Initialization draws one uniform per coordinate
//! in row-major order (salp 0 dimension 0 first); each algorithm documents
//! the order of its per-iteration draws. Normal variates come from
//! `rand_distr::StandardNormal` on the same stream.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::baselines::{Acor, Ga, Pso};
use crate::error::{Error, Result};
use crate::problem::Position;
use crate::salp::{Mssa, Ssa};

/// Per-dimension search interval, identical in every dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lb: f64,
    pub ub: f64,
}

impl Bounds {
    pub fn new(lb: f64, ub: f64) -> Result<Self> {
        if !(lb < ub) || !lb.is_finite() || !ub.is_finite() {
            return Err(Error::invalid(format!(
                "bounds need lb < ub, got [{lb}, {ub}]"
            )));
        }
        Ok(Self { lb, ub })
    }

    pub fn width(&self) -> f64 {
        self.ub - self.lb
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lb && x <= self.ub
    }

    #[inline]
    pub fn clamp_value(&self, x: f64) -> f64 {
        // NaN collapses onto the lower bound
        if x >= self.lb {
            x.min(self.ub)
        } else {
            self.lb
        }
    }

    pub fn clamp_in_place(&self, x: &mut [f64]) {
        for c in x {
            *c = self.clamp_value(*c);
        }
    }
}

/// Coordinate-wise `min(max(c, lb), ub)`.
pub fn clamp_to_bounds(pos: &Position, b: &Bounds) -> Position {
    Position(pos.iter().map(|&c| b.clamp_value(c)).collect())
}

/// A minimization problem over the box `bounds()^dim()`.
pub trait Objective {
    fn dim(&self) -> usize;
    fn bounds(&self) -> Bounds;
    fn evaluate(&self, x: &[f64]) -> f64;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn bounds(&self) -> Bounds {
        (**self).bounds()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }
}

/// Best-known solution; the swarm's target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoodSource {
    pub position: Position,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub positions: Vec<Position>,
    pub fitnesses: Vec<f64>,
}

impl Population {
    /// Evaluate `positions` in order and wrap them up.
    pub fn evaluated(positions: Vec<Position>, ctx: &mut RunContext<'_>) -> Self {
        let fitnesses = positions.iter().map(|p| ctx.evaluate(p)).collect();
        Self {
            positions,
            fitnesses,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Index of the lowest fitness; the first one wins ties.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, &f) in self.fitnesses.iter().enumerate().skip(1) {
            if f < self.fitnesses[best] {
                best = i;
            }
        }
        best
    }

    pub fn best(&self) -> FoodSource {
        let i = self.best_index();
        FoodSource {
            position: self.positions[i].clone(),
            fitness: self.fitnesses[i],
        }
    }
}

/// Uniform positions in the box, drawn row-major from `rng`.
pub fn init_population<R: Rng + ?Sized>(
    n_pop: usize,
    dim: usize,
    bounds: &Bounds,
    rng: &mut R,
) -> Vec<Position> {
    (0..n_pop)
        .map(|_| {
            Position(
                (0..dim)
                    .map(|_| bounds.lb + bounds.width() * rng.random::<f64>())
                    .collect(),
            )
        })
        .collect()
}

/// Exploration/exploitation coefficient `2·exp(-(4l/L)^2)`.
pub fn c1_schedule(l: usize, max_iter: usize) -> f64 {
    C1Variant::Factor4.value(l, max_iter)
}

/// Which decay law drives c1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C1Variant {
    /// `2·exp(-(4l/L)^2)`
    #[default]
    Factor4,
    /// `2·exp(-(l/L)^2)`; kept for sensitivity checks only.
    NoFactor,
}

impl C1Variant {
    pub fn value(self, l: usize, max_iter: usize) -> f64 {
        let ratio = l as f64 / max_iter.max(1) as f64;
        let k = match self {
            C1Variant::Factor4 => 4.0,
            C1Variant::NoFactor => 1.0,
        };
        2.0 * (-(k * ratio).powi(2)).exp()
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "factor4" => Ok(C1Variant::Factor4),
            "no_factor" => Ok(C1Variant::NoFactor),
            other => Err(Error::config(format!(
                "c1_variant must be \"factor4\" or \"no_factor\", got {other:?}"
            ))),
        }
    }
}

/// The five optimizers the harness compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Mssa,
    Ssa,
    Ga,
    Pso,
    Acor,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 5] = [
        AlgorithmKind::Mssa,
        AlgorithmKind::Ssa,
        AlgorithmKind::Ga,
        AlgorithmKind::Pso,
        AlgorithmKind::Acor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmKind::Mssa => "mssa",
            AlgorithmKind::Ssa => "ssa",
            AlgorithmKind::Ga => "ga",
            AlgorithmKind::Pso => "pso",
            AlgorithmKind::Acor => "acor",
        }
    }

    /// Parameter values from the published comparison setup.
    pub fn default_params(self) -> Map<String, Value> {
        let pairs: &[(&str, Value)] = match self {
            AlgorithmKind::Mssa => &[("alpha", Value::from(0.19))],
            AlgorithmKind::Ssa => &[("c1_variant", Value::from("factor4"))],
            AlgorithmKind::Ga => &[
                ("pc", Value::from(0.8)),
                ("pm", Value::from(0.3)),
                ("mu", Value::from(0.02)),
                ("beta", Value::from(8.0)),
                ("rws", Value::from(0)),
            ],
            AlgorithmKind::Pso => &[
                ("c1", Value::from(2.0)),
                ("c2", Value::from(2.0)),
                ("w", Value::from(0.7)),
            ],
            AlgorithmKind::Acor => &[
                ("archive_size", Value::from(40)),
                ("q", Value::from(0.9)),
                ("zeta", Value::from(0.1)),
            ],
        };
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown algorithm {s:?}; valid choices: mssa, ssa, ga, pso, acor"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub n_pop: usize,
    pub max_iter: usize,
    /// Algorithm-specific parameters, by name.
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(n_pop: usize, max_iter: usize, seed: u64) -> Self {
        Self {
            n_pop,
            max_iter,
            params: Map::new(),
            seed,
        }
    }

    /// `nPop = 40`, `MaxIt = 500` plus the published parameters of `kind`.
    pub fn published_defaults(kind: AlgorithmKind, seed: u64) -> Self {
        Self {
            n_pop: 40,
            max_iter: 500,
            params: kind.default_params(),
            seed,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pop < 2 {
            return Err(Error::config(format!(
                "n_pop must be >= 2, got {}",
                self.n_pop
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::config("max_iter must be >= 1"));
        }
        Ok(())
    }
}

/// Typed access to an algorithm's parameter map; rejects unknown keys.
pub(crate) struct Params<'a> {
    algo: AlgorithmKind,
    map: &'a Map<String, Value>,
}

impl<'a> Params<'a> {
    pub(crate) fn new(
        algo: AlgorithmKind,
        map: &'a Map<String, Value>,
        allowed: &[&str],
    ) -> Result<Self> {
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::config(format!(
                "{algo}: unknown parameter {k:?} (expected one of {allowed:?})"
            )));
        }
        Ok(Self { algo, map })
    }

    pub(crate) fn f64(&self, key: &str) -> Result<f64> {
        match self.map.get(key) {
            None => Err(Error::config(format!(
                "{}: missing parameter {key:?}",
                self.algo
            ))),
            Some(v) => v.as_f64().ok_or_else(|| {
                Error::config(format!(
                    "{}: parameter {key:?} must be a number, got {v}",
                    self.algo
                ))
            }),
        }
    }

    pub(crate) fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.map.contains_key(key) {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    pub(crate) fn c1_variant(&self) -> Result<C1Variant> {
        match self.map.get("c1_variant") {
            None => Ok(C1Variant::default()),
            Some(Value::String(s)) => C1Variant::parse(s),
            Some(v) => Err(Error::config(format!(
                "{}: c1_variant must be a string, got {v}",
                self.algo
            ))),
        }
    }
}

/// Everything a single run mutates besides the algorithm's own state.
pub struct RunContext<'a> {
    objective: &'a dyn Objective,
    pub bounds: Bounds,
    pub dim: usize,
    pub rng: ChaCha8Rng,
    evaluations: u64,
}

impl<'a> RunContext<'a> {
    pub fn new(objective: &'a dyn Objective, seed: u64) -> Self {
        Self {
            bounds: objective.bounds(),
            dim: objective.dim(),
            objective,
            rng: ChaCha8Rng::seed_from_u64(seed),
            evaluations: 0,
        }
    }

    pub fn evaluate(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        self.objective.evaluate(x)
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// One optimizer instance, already initialized on a [`RunContext`].
pub trait Optimizer {
    /// Perform iteration `l` (1-based) of `max_iter`.
    fn iterate(&mut self, l: usize, max_iter: usize, ctx: &mut RunContext<'_>);

    /// Best solution found so far.
    fn best(&self) -> &FoodSource;

    /// Current search agents (for GA/ACOr: the surviving population/archive).
    fn positions(&self) -> &[Position];
}

/// Hook called after each iteration; used for instrumentation.
pub trait RunObserver {
    fn after_iteration(&mut self, l: usize, positions: &[Position], best: &FoodSource);
}

impl RunObserver for () {
    fn after_iteration(&mut self, _: usize, _: &[Position], _: &FoodSource) {}
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub algorithm: AlgorithmKind,
    pub seed: u64,
    pub best_position: Position,
    pub best_fitness: f64,
    /// Best-so-far fitness after each iteration; `trace[l - 1]` for iteration `l`.
    pub trace: Vec<f64>,
    pub evaluations: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RunResult {
    /// Equality that ignores `wall_time`.
    pub fn same_outcome(&self, other: &RunResult) -> bool {
        self.algorithm == other.algorithm
            && self.seed == other.seed
            && self.best_position == other.best_position
            && self.best_fitness.to_bits() == other.best_fitness.to_bits()
            && self.trace.len() == other.trace.len()
            && self
                .trace
                .iter()
                .zip(&other.trace)
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self.evaluations == other.evaluations
    }
}

/// Initialize `kind` on `ctx`; consumes the initialization draws.
pub fn build_optimizer(
    kind: AlgorithmKind,
    cfg: &OptimizerConfig,
    ctx: &mut RunContext<'_>,
) -> Result<Box<dyn Optimizer>> {
    cfg.validate()?;
    Ok(match kind {
        AlgorithmKind::Mssa => Box::new(Mssa::new(cfg, ctx)?),
        AlgorithmKind::Ssa => Box::new(Ssa::new(cfg, ctx)?),
        AlgorithmKind::Ga => Box::new(Ga::new(cfg, ctx)?),
        AlgorithmKind::Pso => Box::new(Pso::new(cfg, ctx)?),
        AlgorithmKind::Acor => Box::new(Acor::new(cfg, ctx)?),
    })
}

/// Run `kind` for exactly `cfg.max_iter` iterations.
pub fn run(
    kind: AlgorithmKind,
    objective: &dyn Objective,
    cfg: &OptimizerConfig,
) -> Result<RunResult> {
    run_observed(kind, objective, cfg, &mut ())
}

pub fn run_observed(
    kind: AlgorithmKind,
    objective: &dyn Objective,
    cfg: &OptimizerConfig,
    observer: &mut dyn RunObserver,
) -> Result<RunResult> {
    let start = Instant::now();
    let mut ctx = RunContext::new(objective, cfg.seed);
    let mut opt = build_optimizer(kind, cfg, &mut ctx)?;
    let mut trace = Vec::with_capacity(cfg.max_iter);
    for l in 1..=cfg.max_iter {
        opt.iterate(l, cfg.max_iter, &mut ctx);
        trace.push(opt.best().fitness);
        observer.after_iteration(l, opt.positions(), opt.best());
    }
    let best = opt.best().clone();
    Ok(RunResult {
        algorithm: kind,
        seed: cfg.seed,
        best_position: best.position,
        best_fitness: best.fitness,
        trace,
        evaluations: ctx.evaluations(),
        wall_time: start.elapsed(),
    })
}

/// `{scenario}_{algorithm}_{run_index}.csv`
pub fn trace_file_name(scenario: &str, algorithm: AlgorithmKind, run_index: usize) -> String {
    format!("{scenario}_{algorithm}_{run_index}.csv")
}

/// Write `iteration,best_fitness` rows, iterations numbered from 1.
pub fn write_trace_csv(path: impl AsRef<Path>, trace: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("iteration,best_fitness\n");
    for (i, f) in trace.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, f));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
