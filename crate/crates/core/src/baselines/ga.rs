//! Real-coded genetic algorithm with elitist (mu + lambda) replacement.
//!
//! Per generation: `nc / 2` parent pairs produce two children each through
//! uniform blend crossover, `nm` mutants are Gaussian perturbations of random
//! members, and the merged pool is truncated back to `n_pop` by fitness.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::optimizer::{
    init_population, AlgorithmKind, FoodSource, Optimizer, OptimizerConfig, Params, Population,
    RunContext,
};
use crate::problem::Position;

use super::truncate_best;

const TOURNAMENT_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    /// Crossover fraction; offspring count is `pc·n_pop` rounded to even.
    pub pc: f64,
    /// Mutation fraction; mutant count is `round(pm·n_pop)`.
    pub pm: f64,
    /// Fraction of genes perturbed in each mutant.
    pub mu: f64,
    /// Roulette selection pressure, used only when `rws` is set.
    pub beta: f64,
    pub rws: bool,
    /// Mutation step as a fraction of the bound width.
    pub sigma: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            pc: 0.8,
            pm: 0.3,
            mu: 0.02,
            beta: 8.0,
            rws: false,
            sigma: 0.1,
        }
    }
}

impl GaParams {
    pub fn from_config(cfg: &OptimizerConfig) -> Result<Self> {
        let p = Params::new(
            AlgorithmKind::Ga,
            &cfg.params,
            &["pc", "pm", "mu", "beta", "rws", "sigma"],
        )?;
        let rws = p.f64("rws")?;
        let out = Self {
            pc: p.f64("pc")?,
            pm: p.f64("pm")?,
            mu: p.f64("mu")?,
            beta: p.f64("beta")?,
            rws: match rws {
                0.0 => false,
                1.0 => true,
                other => {
                    return Err(Error::config(format!(
                        "ga: rws must be 0 or 1, got {other}"
                    )))
                }
            },
            sigma: p.f64_or("sigma", 0.1)?,
        };
        for (name, v) in [("pc", out.pc), ("pm", out.pm), ("mu", out.mu)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!(
                    "ga: {name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if !(out.beta >= 0.0) || !(out.sigma >= 0.0) {
            return Err(Error::config("ga: beta and sigma must be non-negative"));
        }
        Ok(out)
    }

    /// Offspring per generation (always even).
    pub fn offspring_count(&self, n_pop: usize) -> usize {
        2 * (self.pc * n_pop as f64 / 2.0).round() as usize
    }

    pub fn mutant_count(&self, n_pop: usize) -> usize {
        (self.pm * n_pop as f64).round() as usize
    }
}

fn tournament<R: Rng + ?Sized>(fitnesses: &[f64], rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fitnesses.len());
    for _ in 1..TOURNAMENT_SIZE {
        let c = rng.random_range(0..fitnesses.len());
        if fitnesses[c] < fitnesses[best] {
            best = c;
        }
    }
    best
}

/// Roulette weights `exp(-beta·f / f_worst)`.
fn roulette_weights(fitnesses: &[f64], beta: f64) -> Vec<f64> {
    let worst = fitnesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(worst > 0.0) || !worst.is_finite() {
        return vec![1.0; fitnesses.len()];
    }
    fitnesses
        .iter()
        .map(|f| (-beta * f / worst).exp())
        .collect()
}

pub(crate) fn roulette<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let r = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Produce the next generation from an evaluated population.
pub fn ga_generation(pop: Population, params: &GaParams, ctx: &mut RunContext<'_>) -> Population {
    let n_pop = pop.len();
    let nc = params.offspring_count(n_pop);
    let nm = params.mutant_count(n_pop);
    let weights = params
        .rws
        .then(|| roulette_weights(&pop.fitnesses, params.beta));

    let mut pool = pop.positions;
    let mut pool_fit = pop.fitnesses;
    let parents = n_pop;
    pool.reserve(nc + nm);
    pool_fit.reserve(nc + nm);

    for _ in 0..nc / 2 {
        let (a, b) = match &weights {
            Some(w) => (roulette(w, &mut ctx.rng), roulette(w, &mut ctx.rng)),
            None => (
                tournament(&pool_fit[..parents], &mut ctx.rng),
                tournament(&pool_fit[..parents], &mut ctx.rng),
            ),
        };
        let mut y1 = Vec::with_capacity(ctx.dim);
        let mut y2 = Vec::with_capacity(ctx.dim);
        for (&x1, &x2) in pool[a].iter().zip(pool[b].iter()) {
            let t: f64 = ctx.rng.random();
            y1.push(t * x1 + (1.0 - t) * x2);
            y2.push(t * x2 + (1.0 - t) * x1);
        }
        for mut y in [y1, y2] {
            ctx.bounds.clamp_in_place(&mut y);
            pool_fit.push(ctx.evaluate(&y));
            pool.push(Position(y));
        }
    }

    let genes = ((params.mu * ctx.dim as f64).ceil() as usize).clamp(1, ctx.dim);
    let step = params.sigma * ctx.bounds.width();
    for _ in 0..nm {
        let src = ctx.rng.random_range(0..parents);
        let mut y = pool[src].0.clone();
        for j in index::sample(&mut ctx.rng, ctx.dim, genes).into_iter() {
            let z: f64 = ctx.rng.sample(StandardNormal);
            y[j] += step * z;
        }
        ctx.bounds.clamp_in_place(&mut y);
        pool_fit.push(ctx.evaluate(&y));
        pool.push(Position(y));
    }

    truncate_best(pool, pool_fit, n_pop)
}

pub struct Ga {
    params: GaParams,
    pop: Population,
    best: FoodSource,
}

impl Ga {
    pub fn new(cfg: &OptimizerConfig, ctx: &mut RunContext<'_>) -> Result<Self> {
        let params = GaParams::from_config(cfg)?;
        let positions = init_population(cfg.n_pop, ctx.dim, &ctx.bounds, &mut ctx.rng);
        let pop = Population::evaluated(positions, ctx);
        let n = pop.len();
        let pop = truncate_best(pop.positions, pop.fitnesses, n);
        let best = pop.best();
        Ok(Self { params, pop, best })
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }
}

impl Optimizer for Ga {
    fn iterate(&mut self, _l: usize, _max_iter: usize, ctx: &mut RunContext<'_>) {
        let pop = std::mem::replace(
            &mut self.pop,
            Population {
                positions: Vec::new(),
                fitnesses: Vec::new(),
            },
        );
        self.pop = ga_generation(pop, &self.params, ctx);
        if self.pop.fitnesses[0] < self.best.fitness {
            self.best = self.pop.best();
        }
    }

    fn best(&self) -> &FoodSource {
        &self.best
    }

    fn positions(&self) -> &[Position] {
        &self.pop.positions
    }
}
