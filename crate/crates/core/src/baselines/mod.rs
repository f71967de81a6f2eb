//! Comparison optimizers. They share the continuous search space, clamp and
//! decode with the salp swarms so every algorithm solves the same problem.

mod acor;
mod ga;
mod pso;

pub use acor::{acor_step, Acor, AcorParams, Archive};
pub use ga::{ga_generation, Ga, GaParams};
pub use pso::{pso_step, Pso, PsoParams, Swarm};

use crate::optimizer::Population;
use crate::problem::Position;

/// Stable sort by ascending fitness, then keep the first `keep`.
pub(crate) fn truncate_best(
    positions: Vec<Position>,
    fitnesses: Vec<f64>,
    keep: usize,
) -> Population {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| fitnesses[a].total_cmp(&fitnesses[b]));
    order.truncate(keep);
    let mut slots: Vec<Option<Position>> = positions.into_iter().map(Some).collect();
    let positions = order
        .iter()
        .map(|&i| slots[i].take().expect("unique index"))
        .collect();
    let fitnesses = order.iter().map(|&i| fitnesses[i]).collect();
    Population {
        positions,
        fitnesses,
    }
}
