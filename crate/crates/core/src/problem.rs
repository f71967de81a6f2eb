//! Static task-to-VM scheduling: instances, the continuous/discrete encoding
//! and the makespan objective.
//!
//! Tasks carry a size (work units) and VMs a speed (work units per second).
//! A candidate solution lives in a continuous box `[1, m]^n`; each coordinate
//! is a fuzzy VM index that [`decode`] snaps to an integer VM number.

use std::fmt;
use std::fs;
use std::ops::{Deref, DerefMut};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optimizer::{Bounds, Objective};

/// One scheduling problem: `n` task sizes and `m` VM speeds.
///
/// Fields are private so every instance in circulation satisfies the
/// positivity invariants checked by [`ProblemInstance::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct ProblemInstance {
    id: String,
    task_sizes: Vec<f64>,
    vm_speeds: Vec<f64>,
}

#[derive(Deserialize)]
struct RawInstance {
    #[serde(default)]
    id: String,
    task_sizes: Vec<f64>,
    vm_speeds: Vec<f64>,
}

impl TryFrom<RawInstance> for ProblemInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        ProblemInstance::new(raw.id, raw.task_sizes, raw.vm_speeds)
    }
}

impl ProblemInstance {
    pub fn new(id: impl Into<String>, task_sizes: Vec<f64>, vm_speeds: Vec<f64>) -> Result<Self> {
        if task_sizes.is_empty() {
            return Err(Error::invalid("instance needs at least one task"));
        }
        if vm_speeds.is_empty() {
            return Err(Error::invalid("instance needs at least one VM"));
        }
        if let Some((i, t)) = task_sizes
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.is_finite() && **t > 0.0))
        {
            return Err(Error::invalid(format!(
                "task {} has non-positive size {t}",
                i + 1
            )));
        }
        if let Some((j, c)) = vm_speeds
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.is_finite() && **c > 0.0))
        {
            return Err(Error::invalid(format!(
                "VM {} has non-positive speed {c}",
                j + 1
            )));
        }
        Ok(Self {
            id: id.into(),
            task_sizes,
            vm_speeds,
        })
    }

    /// The 12-task / 5-VM example used throughout the fitness discussion.
    pub fn reference_example() -> Self {
        Self::new(
            "example-12x5",
            vec![
                18.0, 15.0, 19.0, 24.0, 33.0, 41.0, 22.0, 12.0, 30.0, 16.0, 13.0, 32.0,
            ],
            vec![3.4, 2.4, 3.2, 1.8, 2.2],
        )
        .expect("reference example is valid")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn task_sizes(&self) -> &[f64] {
        &self.task_sizes
    }

    pub fn vm_speeds(&self) -> &[f64] {
        &self.vm_speeds
    }

    pub fn n_tasks(&self) -> usize {
        self.task_sizes.len()
    }

    pub fn n_vms(&self) -> usize {
        self.vm_speeds.len()
    }

    /// Search box for this instance: `[1, m]` in every dimension.
    ///
    /// With a single VM the box is widened to `[1, 1 + 1e-9]` so `lb < ub`
    /// holds; every point in it still decodes to VM 1.
    pub fn bounds(&self) -> Bounds {
        let m = self.n_vms() as f64;
        if self.n_vms() == 1 {
            Bounds::new(1.0, 1.0 + 1e-9).expect("valid")
        } else {
            Bounds::new(1.0, m).expect("m >= 2")
        }
    }

    /// Stable content hash (hex SHA-256 over id and the raw f64 bits).
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.id.as_bytes());
        h.update((self.task_sizes.len() as u64).to_le_bytes());
        for t in &self.task_sizes {
            h.update(t.to_bits().to_le_bytes());
        }
        h.update((self.vm_speeds.len() as u64).to_le_bytes());
        for c in &self.vm_speeds {
            h.update(c.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes") + "\n"
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Continuous salp position, one fuzzy VM index per task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub Vec<f64>);

impl Position {
    /// Integer assignment viewed as a point in the continuous space.
    pub fn lift(assignment: &Assignment) -> Self {
        Position(assignment.iter().map(|&v| v as f64).collect())
    }
}

impl Deref for Position {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Position {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Position {
    fn from(v: Vec<f64>) -> Self {
        Position(v)
    }
}

/// Task -> VM mapping with 1-based VM numbers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub Vec<usize>);

impl Deref for Assignment {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Assignment {
    fn from(v: Vec<usize>) -> Self {
        Assignment(v)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, vm) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{vm}")?;
        }
        Ok(())
    }
}

/// Execution time of one task on one VM.
pub fn exec_time(task_size: f64, vm_speed: f64) -> Result<f64> {
    if !(task_size > 0.0) || !(vm_speed > 0.0) {
        return Err(Error::invalid(format!(
            "exec_time needs positive arguments, got size {task_size}, speed {vm_speed}"
        )));
    }
    Ok(task_size / vm_speed)
}

fn check_assignment(assignment: &Assignment, inst: &ProblemInstance) -> Result<()> {
    if assignment.len() != inst.n_tasks() {
        return Err(Error::invalid(format!(
            "assignment has {} entries, instance has {} tasks",
            assignment.len(),
            inst.n_tasks()
        )));
    }
    let m = inst.n_vms();
    if let Some((i, vm)) = assignment
        .iter()
        .enumerate()
        .find(|(_, &vm)| vm == 0 || vm > m)
    {
        return Err(Error::invalid(format!(
            "task {} assigned to VM {vm}, valid range is 1..={m}",
            i + 1
        )));
    }
    Ok(())
}

// Caller guarantees a validated assignment.
fn loads(assignment: &[usize], inst: &ProblemInstance) -> Vec<f64> {
    let mut out = vec![0.0; inst.n_vms()];
    for (size, &vm) in inst.task_sizes.iter().zip(assignment) {
        out[vm - 1] += size / inst.vm_speeds[vm - 1];
    }
    out
}

/// Total execution time per VM; idle VMs report 0.
pub fn completion_times(assignment: &Assignment, inst: &ProblemInstance) -> Result<Vec<f64>> {
    check_assignment(assignment, inst)?;
    Ok(loads(assignment, inst))
}

pub fn makespan(assignment: &Assignment, inst: &ProblemInstance) -> Result<f64> {
    check_assignment(assignment, inst)?;
    Ok(max_load(&loads(assignment, inst)))
}

fn max_load(loads: &[f64]) -> f64 {
    loads.iter().copied().fold(0.0, f64::max)
}

/// Snap each coordinate to the nearest VM number (ties away from zero),
/// then clamp into `1..=m`. NaN coordinates map to VM 1.
pub fn decode(pos: &[f64], m: usize) -> Assignment {
    let hi = m.max(1);
    Assignment(
        pos.iter()
            .map(|&c| {
                let r = c.round();
                if !(r >= 1.0) {
                    1
                } else if r >= hi as f64 {
                    hi
                } else {
                    r as usize
                }
            })
            .collect(),
    )
}

/// Makespan lower bound: perfect load balancing, or the largest task on the
/// fastest VM, whichever is larger.
pub fn lower_bound(inst: &ProblemInstance) -> f64 {
    let total_work: f64 = inst.task_sizes.iter().sum();
    let total_speed: f64 = inst.vm_speeds.iter().sum();
    let largest = inst.task_sizes.iter().copied().fold(0.0, f64::max);
    let fastest = inst.vm_speeds.iter().copied().fold(0.0, f64::max);
    (total_work / total_speed).max(largest / fastest)
}

/// Parameters for drawing a random instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceGenSpec {
    pub n: usize,
    pub m: usize,
    /// Inclusive integer range for task sizes.
    #[serde(default = "default_task_size_range")]
    pub task_size_range: [u64; 2],
    /// Inclusive range for VM speeds; draws are rounded to one decimal.
    #[serde(default = "default_vm_speed_range")]
    pub vm_speed_range: [f64; 2],
    #[serde(default)]
    pub seed: u64,
}

fn default_task_size_range() -> [u64; 2] {
    [10, 45]
}

fn default_vm_speed_range() -> [f64; 2] {
    [1.0, 4.0]
}

impl InstanceGenSpec {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            task_size_range: default_task_size_range(),
            vm_speed_range: default_vm_speed_range(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::invalid(format!(
                "instance needs n >= 1 and m >= 1, got n={} m={}",
                self.n, self.m
            )));
        }
        let [tlo, thi] = self.task_size_range;
        if tlo == 0 || tlo > thi {
            return Err(Error::invalid(format!(
                "task_size_range [{tlo}, {thi}] must be positive with lo <= hi"
            )));
        }
        let [slo, shi] = self.vm_speed_range;
        if !(slo > 0.0 && slo <= shi && shi.is_finite()) {
            return Err(Error::invalid(format!(
                "vm_speed_range [{slo}, {shi}] must be positive with lo <= hi"
            )));
        }
        // Rounding to one decimal must not produce a zero speed.
        if slo < 0.05 {
            return Err(Error::invalid(format!(
                "vm_speed_range lower bound {slo} rounds to zero"
            )));
        }
        Ok(())
    }
}

/// Draw an instance; task sizes first, then VM speeds, from one seeded stream.
pub fn generate_instance(spec: &InstanceGenSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let [tlo, thi] = spec.task_size_range;
    let task_sizes = (0..spec.n)
        .map(|_| rng.random_range(tlo..=thi) as f64)
        .collect();
    let [slo, shi] = spec.vm_speed_range;
    let vm_speeds = (0..spec.m)
        .map(|_| {
            let s = if slo == shi {
                slo
            } else {
                rng.random_range(slo..=shi)
            };
            (s * 10.0).round() / 10.0
        })
        .collect();
    ProblemInstance::new(
        format!("gen-n{}-m{}-s{}", spec.n, spec.m, spec.seed),
        task_sizes,
        vm_speeds,
    )
}

/// Makespan of the decoded position; the objective every optimizer minimizes.
#[derive(Debug, Clone)]
pub struct SchedulingProblem {
    instance: ProblemInstance,
}

impl SchedulingProblem {
    pub fn new(instance: ProblemInstance) -> Self {
        Self { instance }
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }
}

impl Objective for SchedulingProblem {
    fn dim(&self) -> usize {
        self.instance.n_tasks()
    }

    fn bounds(&self) -> Bounds {
        self.instance.bounds()
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        let a = decode(x, self.instance.n_vms());
        max_load(&loads(&a, &self.instance))
    }
}
