//! Exhaustive makespan minimizer for tiny instances.

use crate::error::{Error, Result};
use crate::problem::{makespan, Assignment, ProblemInstance};

pub const DEFAULT_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub optimal_assignment: Assignment,
    pub optimal_makespan: f64,
    pub assignments_searched: u64,
}

/// `m^n`, or `None` when it does not fit in a `u64`.
pub fn search_space_size(inst: &ProblemInstance) -> Option<u64> {
    let n = u32::try_from(inst.n_tasks()).ok()?;
    (inst.n_vms() as u64).checked_pow(n)
}

/// Enumerate all `m^n` assignments with a mixed-radix counter (task 1
/// fastest-varying). Among equal makespans the lexicographically smallest
/// assignment wins.
pub fn brute_force_optimal(inst: &ProblemInstance, limit: u64) -> Result<OracleResult> {
    let (n, m) = (inst.n_tasks(), inst.n_vms());
    match search_space_size(inst) {
        Some(size) if size <= limit => {}
        _ => {
            return Err(Error::SearchSpaceTooLarge {
                vms: m,
                tasks: n,
                limit,
            })
        }
    }

    let mut current = Assignment(vec![1; n]);
    let mut best = current.clone();
    let mut best_ms = makespan(&current, inst)?;
    let mut searched = 1u64;
    loop {
        // advance the counter
        let mut digit = 0;
        while digit < n && current.0[digit] == m {
            current.0[digit] = 1;
            digit += 1;
        }
        if digit == n {
            break;
        }
        current.0[digit] += 1;
        searched += 1;

        let ms = makespan(&current, inst)?;
        if ms < best_ms || (ms == best_ms && current < best) {
            best_ms = ms;
            best.clone_from(&current);
        }
    }

    Ok(OracleResult {
        optimal_assignment: best,
        optimal_makespan: best_ms,
        assignments_searched: searched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::lower_bound;

    #[test]
    fn symmetric_pair() {
        let inst = ProblemInstance::new("p", vec![2.0, 2.0], vec![1.0, 1.0]).unwrap();
        let r = brute_force_optimal(&inst, DEFAULT_LIMIT).unwrap();
        assert_eq!(r.optimal_makespan, 2.0);
        assert_eq!(r.optimal_assignment, Assignment(vec![1, 2]));
        assert_eq!(r.assignments_searched, 4);
    }

    #[test]
    fn single_vm_sums_everything() {
        let inst = ProblemInstance::new("s", vec![3.0, 4.0, 5.0], vec![2.0]).unwrap();
        let r = brute_force_optimal(&inst, DEFAULT_LIMIT).unwrap();
        assert_eq!(r.optimal_makespan, 6.0);
        assert_eq!(r.assignments_searched, 1);
    }

    #[test]
    fn three_task_prefix_matches_hand_enumeration() {
        // sizes 18, 15, 19 on speeds 3.4, 2.4: all eight assignments by hand
        let sizes = [18.0, 15.0, 19.0];
        let speeds = [3.4, 2.4];
        let mut best = f64::INFINITY;
        for mask in 0..8u32 {
            let mut load = [0.0f64; 2];
            for (t, s) in sizes.iter().enumerate() {
                let vm = ((mask >> t) & 1) as usize;
                load[vm] += s / speeds[vm];
            }
            best = best.min(load[0].max(load[1]));
        }
        // tasks 1 and 2 on the fast VM: 33 / 3.4
        assert!((best - 33.0 / 3.4).abs() < 1e-12);
        let inst = ProblemInstance::new("t3", sizes.to_vec(), speeds.to_vec()).unwrap();
        let r = brute_force_optimal(&inst, DEFAULT_LIMIT).unwrap();
        assert_eq!(r.optimal_makespan, best);
        assert_eq!(r.optimal_assignment, Assignment(vec![1, 1, 2]));
        assert_eq!(r.assignments_searched, 8);
        assert!(r.optimal_makespan >= lower_bound(&inst));
    }

    #[test]
    fn too_large_is_rejected() {
        let inst = ProblemInstance::new("big", vec![1.0; 300], vec![1.0; 10]).unwrap();
        assert_eq!(search_space_size(&inst), None);
        let err = brute_force_optimal(&inst, DEFAULT_LIMIT).unwrap_err();
        assert_eq!(
            err.to_string(),
            "search space too large: 10^300 exceeds limit 10000000"
        );
        let small = ProblemInstance::new("s", vec![1.0; 4], vec![1.0; 3]).unwrap();
        assert!(brute_force_optimal(&small, 80).is_err());
        assert!(brute_force_optimal(&small, 81).is_ok());
    }
}
