//! Continuous ant colony optimization over a ranked solution archive.
//!
//! Each new sample picks one archive member as its Gaussian kernel (rank
//! weights `exp(-(r-1)^2 / (2 q^2 k^2)) / (q k sqrt(2 pi))`), then draws every
//! coordinate from `N(x_r, zeta · mean |x_e - x_r|)`. Samples join the archive
//! and the best `k` survive.
//!
//! Draw order per sample: one uniform for the kernel, then one normal per
//! dimension.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::optimizer::{
    init_population, AlgorithmKind, FoodSource, Optimizer, OptimizerConfig, Params, Population,
    RunContext,
};
use crate::problem::Position;

use super::ga::roulette;
use super::truncate_best;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcorParams {
    pub archive_size: usize,
    /// Intensification factor.
    pub q: f64,
    /// Deviation-distance ratio.
    pub zeta: f64,
}

impl Default for AcorParams {
    fn default() -> Self {
        Self {
            archive_size: 40,
            q: 0.9,
            zeta: 0.1,
        }
    }
}

impl AcorParams {
    pub fn from_config(cfg: &OptimizerConfig) -> Result<Self> {
        let p = Params::new(
            AlgorithmKind::Acor,
            &cfg.params,
            &["archive_size", "q", "zeta"],
        )?;
        let k = p.f64("archive_size")?;
        if !(k >= 2.0 && k.fract() == 0.0) {
            return Err(Error::config(format!(
                "acor: archive_size must be an integer >= 2, got {k}"
            )));
        }
        let out = Self {
            archive_size: k as usize,
            q: p.f64("q")?,
            zeta: p.f64("zeta")?,
        };
        if !(out.q > 0.0 && out.zeta > 0.0) {
            return Err(Error::config("acor: q and zeta must be positive"));
        }
        Ok(out)
    }

    /// Unnormalized kernel weight of each rank, best first.
    pub fn rank_weights(&self) -> Vec<f64> {
        let k = self.archive_size as f64;
        let s = self.q * k;
        (0..self.archive_size)
            .map(|r| (-(r as f64).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt()))
            .collect()
    }
}

/// Archive kept sorted by ascending fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub solutions: Population,
    weights: Vec<f64>,
}

impl Archive {
    pub fn new(pop: Population, params: &AcorParams) -> Self {
        let n = pop.len();
        Self {
            solutions: truncate_best(pop.positions, pop.fitnesses, n),
            weights: params.rank_weights(),
        }
    }

    /// Kernel spread of member `r` in each dimension.
    fn spread(&self, r: usize, zeta: f64) -> Vec<f64> {
        let sols = &self.solutions.positions;
        let k = sols.len();
        let base = &sols[r];
        (0..base.len())
            .map(|j| {
                let total: f64 = sols.iter().map(|s| (s[j] - base[j]).abs()).sum();
                zeta * total / (k - 1) as f64
            })
            .collect()
    }
}

/// Draw `n_samples` new solutions and merge them into the archive.
pub fn acor_step(
    archive: &mut Archive,
    params: &AcorParams,
    n_samples: usize,
    ctx: &mut RunContext<'_>,
) {
    let k = archive.solutions.len();
    let weights = &archive.weights[..k];
    let mut spreads: Vec<Option<Vec<f64>>> = vec![None; k];
    let mut positions = archive.solutions.positions.clone();
    let mut fitnesses = archive.solutions.fitnesses.clone();
    for _ in 0..n_samples {
        let r = roulette(weights, &mut ctx.rng);
        let sigma = spreads[r].get_or_insert_with(|| archive.spread(r, params.zeta));
        let mut y: Vec<f64> = archive.solutions.positions[r]
            .iter()
            .zip(sigma.iter())
            .map(|(&m, &s)| {
                let z: f64 = ctx.rng.sample(StandardNormal);
                m + s * z
            })
            .collect();
        ctx.bounds.clamp_in_place(&mut y);
        fitnesses.push(ctx.evaluate(&y));
        positions.push(Position(y));
    }
    archive.solutions = truncate_best(positions, fitnesses, k);
}

pub struct Acor {
    params: AcorParams,
    n_samples: usize,
    archive: Archive,
    best: FoodSource,
}

impl Acor {
    pub fn new(cfg: &OptimizerConfig, ctx: &mut RunContext<'_>) -> Result<Self> {
        let params = AcorParams::from_config(cfg)?;
        let positions = init_population(params.archive_size, ctx.dim, &ctx.bounds, &mut ctx.rng);
        let archive = Archive::new(Population::evaluated(positions, ctx), &params);
        let best = archive.solutions.best();
        Ok(Self {
            params,
            n_samples: cfg.n_pop,
            archive,
            best,
        })
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }
}

impl Optimizer for Acor {
    fn iterate(&mut self, _l: usize, _max_iter: usize, ctx: &mut RunContext<'_>) {
        acor_step(&mut self.archive, &self.params, self.n_samples, ctx);
        if self.archive.solutions.fitnesses[0] < self.best.fitness {
            self.best = self.archive.solutions.best();
        }
    }

    fn best(&self) -> &FoodSource {
        &self.best
    }

    fn positions(&self) -> &[Position] {
        &self.archive.solutions.positions
    }
}
