//! Salp swarm optimizers.
//!
//! [`Mssa`] splits the chain in half: leaders jump to Gaussian samples
//! around the food source, followers average with their predecessor and add
//! c1-scaled Gaussian noise. Every salp is clamped and evaluated as soon as it
//! moves, and the food source is updated immediately, so later salps in the
//! same sweep already see the new target. Leaders take over the food source on
//! ties, followers only on strict improvement.
//!
//! [`Ssa`] is the standard single-leader chain: the leader samples around the
//! food source with a c1-scaled, bound-proportional step and followers move to
//! the midpoint of themselves and their predecessor. The food source is
//! refreshed once per sweep from the population best.
//!
//! Draw order per iteration (both variants): salps in chain order; within a
//! salp, dimensions in order. MSSA draws one standard normal per coordinate
//! for every salp. SSA draws `(c2, c3)` per coordinate for the leader only.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::optimizer::{
    init_population, AlgorithmKind, Bounds, C1Variant, FoodSource, Optimizer, OptimizerConfig,
    Params, Population, RunContext,
};
use crate::problem::Position;

/// Share of the chain that follows the leader rule in MSSA.
pub const LEADER_FRACTION: f64 = 0.5;

/// Number of leaders for a chain of `n_pop` salps: every 1-based `i <= N/2`.
pub fn leader_count(n_pop: usize) -> usize {
    (n_pop as f64 * LEADER_FRACTION).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MssaParams {
    /// Standard deviation of the leader step around the food source.
    pub alpha: f64,
    pub c1_variant: C1Variant,
}

impl MssaParams {
    pub fn from_config(cfg: &OptimizerConfig) -> Result<Self> {
        let p = Params::new(AlgorithmKind::Mssa, &cfg.params, &["alpha", "c1_variant"])?;
        let alpha = p.f64("alpha")?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config(format!(
                "mssa: alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            c1_variant: p.c1_variant()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SsaParams {
    pub c1_variant: C1Variant,
}

impl SsaParams {
    pub fn from_config(cfg: &OptimizerConfig) -> Result<Self> {
        let p = Params::new(AlgorithmKind::Ssa, &cfg.params, &["c1_variant"])?;
        Ok(Self {
            c1_variant: p.c1_variant()?,
        })
    }
}

/// `F_j + alpha·N(0,1)` per dimension. Unclamped.
pub fn mssa_leader_update<R: Rng + ?Sized>(food: &FoodSource, alpha: f64, rng: &mut R) -> Position {
    Position(
        food.position
            .iter()
            .map(|&f| {
                let z: f64 = rng.sample(StandardNormal);
                f + alpha * z
            })
            .collect(),
    )
}

fn noisy_midpoint<R: Rng + ?Sized>(
    self_pos: &[f64],
    prev_pos: &[f64],
    c1: f64,
    rng: &mut R,
) -> Position {
    Position(
        self_pos
            .iter()
            .zip(prev_pos)
            .map(|(&x, &p)| {
                let z: f64 = rng.sample(StandardNormal);
                0.5 * (x + p) + c1 * z
            })
            .collect(),
    )
}

/// Midpoint of the salp and its predecessor plus `c1·N(0,1)` per dimension.
pub fn mssa_follower_update<R: Rng + ?Sized>(
    self_pos: &Position,
    prev_pos: &Position,
    c1: f64,
    rng: &mut R,
) -> Result<Position> {
    check_same_len(self_pos, prev_pos)?;
    Ok(noisy_midpoint(self_pos, prev_pos, c1, rng))
}

/// Standard SSA leader move. `c2` sets the step size, `c3 >= 0.5` picks the
/// positive direction; both are fresh uniforms per dimension.
pub fn ssa_leader_update<R: Rng + ?Sized>(
    food: &FoodSource,
    bounds: &Bounds,
    c1: f64,
    rng: &mut R,
) -> Position {
    Position(
        food.position
            .iter()
            .map(|&f| {
                let c2: f64 = rng.random();
                let c3: f64 = rng.random();
                let step = c1 * (bounds.width() * c2 + bounds.lb);
                if c3 >= 0.5 {
                    f + step
                } else {
                    f - step
                }
            })
            .collect(),
    )
}

/// Coordinate-wise midpoint; no randomness.
pub fn ssa_follower_update(self_pos: &Position, prev_pos: &Position) -> Result<Position> {
    check_same_len(self_pos, prev_pos)?;
    Ok(midpoint(self_pos, prev_pos))
}

fn midpoint(a: &[f64], b: &[f64]) -> Position {
    Position(a.iter().zip(b).map(|(&x, &p)| 0.5 * (x + p)).collect())
}

fn check_same_len(a: &Position, b: &Position) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "position lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// One MSSA sweep over the chain with leader coefficient `alpha` and
/// follower noise `c1`.
pub fn mssa_iteration(
    pop: &mut Population,
    food: &mut FoodSource,
    alpha: f64,
    c1: f64,
    ctx: &mut RunContext<'_>,
) {
    let leaders = leader_count(pop.len());
    for i in 0..pop.len() {
        let mut next = if i < leaders {
            mssa_leader_update(food, alpha, &mut ctx.rng)
        } else {
            let (done, rest) = pop.positions.split_at(i);
            noisy_midpoint(&rest[0], &done[i - 1], c1, &mut ctx.rng)
        };
        ctx.bounds.clamp_in_place(&mut next);
        let fit = ctx.evaluate(&next);
        let replace = if i < leaders {
            fit <= food.fitness
        } else {
            fit < food.fitness
        };
        if replace {
            food.position.clone_from(&next);
            food.fitness = fit;
        }
        pop.positions[i] = next;
        pop.fitnesses[i] = fit;
    }
}

/// One standard SSA sweep: salp 0 leads, the rest follow their (already
/// moved) predecessor. The food source takes the sweep's best salp if it is
/// strictly better.
pub fn ssa_iteration(
    pop: &mut Population,
    food: &mut FoodSource,
    c1: f64,
    ctx: &mut RunContext<'_>,
) {
    for i in 0..pop.len() {
        let mut next = if i == 0 {
            ssa_leader_update(food, &ctx.bounds, c1, &mut ctx.rng)
        } else {
            midpoint(&pop.positions[i], &pop.positions[i - 1])
        };
        ctx.bounds.clamp_in_place(&mut next);
        pop.fitnesses[i] = ctx.evaluate(&next);
        pop.positions[i] = next;
    }
    let best = pop.best_index();
    if pop.fitnesses[best] < food.fitness {
        *food = FoodSource {
            position: pop.positions[best].clone(),
            fitness: pop.fitnesses[best],
        };
    }
}

fn initial_chain(cfg: &OptimizerConfig, ctx: &mut RunContext<'_>) -> (Population, FoodSource) {
    let positions = init_population(cfg.n_pop, ctx.dim, &ctx.bounds, &mut ctx.rng);
    let pop = Population::evaluated(positions, ctx);
    let food = pop.best();
    (pop, food)
}

/// Modified salp swarm: half leaders around the food source, half noisy followers.
pub struct Mssa {
    params: MssaParams,
    pop: Population,
    food: FoodSource,
}

impl Mssa {
    pub fn new(cfg: &OptimizerConfig, ctx: &mut RunContext<'_>) -> Result<Self> {
        let params = MssaParams::from_config(cfg)?;
        let (pop, food) = initial_chain(cfg, ctx);
        Ok(Self { params, pop, food })
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }
}

impl Optimizer for Mssa {
    fn iterate(&mut self, l: usize, max_iter: usize, ctx: &mut RunContext<'_>) {
        let c1 = self.params.c1_variant.value(l, max_iter);
        mssa_iteration(&mut self.pop, &mut self.food, self.params.alpha, c1, ctx);
    }

    fn best(&self) -> &FoodSource {
        &self.food
    }

    fn positions(&self) -> &[Position] {
        &self.pop.positions
    }
}

/// Standard salp swarm with a single leader.
pub struct Ssa {
    params: SsaParams,
    pop: Population,
    food: FoodSource,
}

impl Ssa {
    pub fn new(cfg: &OptimizerConfig, ctx: &mut RunContext<'_>) -> Result<Self> {
        let params = SsaParams::from_config(cfg)?;
        let (pop, food) = initial_chain(cfg, ctx);
        Ok(Self { params, pop, food })
    }
}

impl Optimizer for Ssa {
    fn iterate(&mut self, l: usize, max_iter: usize, ctx: &mut RunContext<'_>) {
        let c1 = self.params.c1_variant.value(l, max_iter);
        ssa_iteration(&mut self.pop, &mut self.food, c1, ctx);
    }

    fn best(&self) -> &FoodSource {
        &self.food
    }

    fn positions(&self) -> &[Position] {
        &self.pop.positions
    }
}
