//! Inertia-weight particle swarm.
//!
//! Draw order per particle: `(r1, r2)` per dimension. Velocities start at
//! zero and are clamped to `±v_max` before the position update.

use rand::Rng;

use crate::error::{Error, Result};
use crate::optimizer::{
    init_population, AlgorithmKind, Bounds, FoodSource, Optimizer, OptimizerConfig, Params,
    Population, RunContext,
};
use crate::problem::Position;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoParams {
    /// Personal learning coefficient.
    pub c1: f64,
    /// Global learning coefficient.
    pub c2: f64,
    /// Inertia weight.
    pub w: f64,
    /// Velocity limit as a fraction of the bound width.
    pub v_max_fraction: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            c1: 2.0,
            c2: 2.0,
            w: 0.7,
            v_max_fraction: 0.2,
        }
    }
}

impl PsoParams {
    pub fn from_config(cfg: &OptimizerConfig) -> Result<Self> {
        let p = Params::new(
            AlgorithmKind::Pso,
            &cfg.params,
            &["c1", "c2", "w", "v_max_fraction"],
        )?;
        let out = Self {
            c1: p.f64("c1")?,
            c2: p.f64("c2")?,
            w: p.f64("w")?,
            v_max_fraction: p.f64_or("v_max_fraction", 0.2)?,
        };
        if !(out.w > 0.0 && out.w < 1.0) {
            return Err(Error::config(format!(
                "pso: w must lie in (0, 1), got {}",
                out.w
            )));
        }
        if !(out.c1 > 0.0 && out.c2 > 0.0) {
            return Err(Error::config("pso: c1 and c2 must be positive"));
        }
        if !(out.v_max_fraction > 0.0) {
            return Err(Error::config("pso: v_max_fraction must be positive"));
        }
        Ok(out)
    }

    pub fn v_max(&self, bounds: &Bounds) -> f64 {
        self.v_max_fraction * bounds.width()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub positions: Vec<Position>,
    pub velocities: Vec<Vec<f64>>,
    pub pbest: Population,
    pub gbest: FoodSource,
}

impl Swarm {
    /// Zero velocities; personal bests start at the evaluated positions.
    pub fn new(pop: Population) -> Self {
        let gbest = pop.best();
        Self {
            positions: pop.positions.clone(),
            velocities: vec![vec![0.0; pop.positions.first().map_or(0, |p| p.len())]; pop.len()],
            pbest: pop,
            gbest,
        }
    }
}

/// Move every particle once. Personal and global bests update on strict
/// improvement, the global one immediately.
pub fn pso_step(swarm: &mut Swarm, params: &PsoParams, ctx: &mut RunContext<'_>) {
    let v_max = params.v_max(&ctx.bounds);
    for i in 0..swarm.positions.len() {
        let x = &mut swarm.positions[i];
        let v = &mut swarm.velocities[i];
        let pb = &swarm.pbest.positions[i];
        for j in 0..x.len() {
            let r1: f64 = ctx.rng.random();
            let r2: f64 = ctx.rng.random();
            let vj = params.w * v[j]
                + params.c1 * r1 * (pb[j] - x[j])
                + params.c2 * r2 * (swarm.gbest.position[j] - x[j]);
            v[j] = vj.clamp(-v_max, v_max);
            x[j] = ctx.bounds.clamp_value(x[j] + v[j]);
        }
        let f = ctx.evaluate(x);
        if f < swarm.pbest.fitnesses[i] {
            swarm.pbest.positions[i].clone_from(x);
            swarm.pbest.fitnesses[i] = f;
        }
        if f < swarm.gbest.fitness {
            swarm.gbest.position.clone_from(x);
            swarm.gbest.fitness = f;
        }
    }
}

pub struct Pso {
    params: PsoParams,
    swarm: Swarm,
}

impl Pso {
    pub fn new(cfg: &OptimizerConfig, ctx: &mut RunContext<'_>) -> Result<Self> {
        let params = PsoParams::from_config(cfg)?;
        let positions = init_population(cfg.n_pop, ctx.dim, &ctx.bounds, &mut ctx.rng);
        let swarm = Swarm::new(Population::evaluated(positions, ctx));
        Ok(Self { params, swarm })
    }

    pub fn swarm(&self) -> &Swarm {
        &self.swarm
    }
}

impl Optimizer for Pso {
    fn iterate(&mut self, _l: usize, _max_iter: usize, ctx: &mut RunContext<'_>) {
        pso_step(&mut self.swarm, &self.params, ctx);
    }

    fn best(&self) -> &FoodSource {
        &self.swarm.gbest
    }

    fn positions(&self) -> &[Position] {
        &self.swarm.positions
    }
}
