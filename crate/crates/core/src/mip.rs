//! Best-bound branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{input_err, Error, Result};
use crate::lp::{dot, solve_lp, LpInstance, LpSolution, LpStatus};

/// Distance from 0 or 1 below which a binary counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MipInstance {
    pub lp: LpInstance,
    pub binaries: Vec<usize>,
}

impl MipInstance {
    pub fn new(lp: LpInstance, mut binaries: Vec<usize>) -> Self {
        binaries.sort_unstable();
        binaries.dedup();
        MipInstance { lp, binaries }
    }

    pub fn validate(&self) -> Result<()> {
        self.lp.validate()?;
        for &j in &self.binaries {
            if j >= self.lp.num_vars() {
                return input_err(format!("binary index {j} out of range"));
            }
            let (lo, hi) = self.lp.bounds[j];
            let ok = |v: f64| v == 0.0 || v == 1.0;
            if !ok(lo) || !ok(hi) {
                return input_err(format!("binary variable {j} has bounds [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipSolution {
    pub status: MipStatus,
    pub incumbent: Vec<f64>,
    pub objective: f64,
    /// Number of LP relaxations solved.
    pub nodes: usize,
}

struct Node {
    bound: f64,
    seq: usize,
    bounds: Vec<(f64, f64)>,
    primal: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Reversed so the max-heap pops the lowest bound, then the oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn most_fractional(binaries: &[usize], x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binaries {
        let frac = (x[j] - x[j].round()).abs();
        if frac > INTEGRALITY_TOL && best.is_none_or(|(_, f)| frac > f) {
            best = Some((j, frac));
        }
    }
    best.map(|(j, _)| j)
}

fn solve_node(lp: &mut LpInstance, bounds: &[(f64, f64)]) -> Result<LpSolution> {
    lp.bounds.copy_from_slice(bounds);
    solve_lp(lp)
}

pub fn solve_mip(mip: &MipInstance) -> Result<MipSolution> {
    solve_mip_from(mip, None)
}

/// Like [`solve_mip`], seeded with `start` as the first incumbent when it
/// is feasible and integral.
pub fn solve_mip_from(mip: &MipInstance, start: Option<&[f64]>) -> Result<MipSolution> {
    mip.validate()?;
    let mut work = mip.lp.clone();
    let root_bounds = mip.lp.bounds.clone();
    let root = solve_node(&mut work, &root_bounds)?;
    let mut nodes = 1usize;
    match root.status {
        LpStatus::Infeasible => {
            return Ok(MipSolution {
                status: MipStatus::Infeasible,
                incumbent: Vec::new(),
                objective: f64::INFINITY,
                nodes,
            })
        }
        LpStatus::Unbounded => return Err(Error::Unbounded),
        LpStatus::Optimal => {}
    }

    let mut incumbent: Option<Vec<f64>> = None;
    let mut best = f64::INFINITY;
    let prune = |bound: f64, best: f64| bound >= best - 1e-9 * best.abs().max(1.0);

    let accept = |x: Vec<f64>, incumbent: &mut Option<Vec<f64>>, best: &mut f64| {
        let mut x = x;
        for &j in &mip.binaries {
            x[j] = x[j].round();
        }
        let obj = dot(&mip.lp.objective, &x);
        if obj < *best {
            *best = obj;
            *incumbent = Some(x);
        }
    };

    if let Some(x) = start {
        let integral = mip.binaries.iter().all(|&j| x[j] == 0.0 || x[j] == 1.0);
        let in_bounds = x
            .iter()
            .zip(&mip.lp.bounds)
            .all(|(&v, &(lo, hi))| v >= lo && v <= hi);
        if x.len() == mip.lp.num_vars()
            && integral
            && in_bounds
            && mip.lp.max_violation(x) <= 1e-9
        {
            accept(x.to_vec(), &mut incumbent, &mut best);
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    if most_fractional(&mip.binaries, &root.primal).is_none() {
        accept(root.primal, &mut incumbent, &mut best);
    } else {
        heap.push(Node {
            bound: root.objective,
            seq,
            bounds: root_bounds,
            primal: root.primal,
        });
    }

    while let Some(node) = heap.pop() {
        if prune(node.bound, best) {
            break;
        }
        let Some(j) = most_fractional(&mip.binaries, &node.primal) else {
            continue;
        };
        for value in [0.0, 1.0] {
            let mut bounds = node.bounds.clone();
            bounds[j] = (value, value);
            let sol = solve_node(&mut work, &bounds)?;
            nodes += 1;
            match sol.status {
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => return Err(Error::Unbounded),
                LpStatus::Optimal => {}
            }
            if prune(sol.objective, best) {
                continue;
            }
            if most_fractional(&mip.binaries, &sol.primal).is_none() {
                accept(sol.primal, &mut incumbent, &mut best);
            } else {
                seq += 1;
                heap.push(Node {
                    bound: sol.objective,
                    seq,
                    bounds,
                    primal: sol.primal,
                });
            }
        }
    }

    Ok(match incumbent {
        Some(x) => MipSolution {
            status: MipStatus::Optimal,
            incumbent: x,
            objective: best,
            nodes,
        },
        None => MipSolution {
            status: MipStatus::Infeasible,
            incumbent: Vec::new(),
            objective: f64::INFINITY,
            nodes,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Relation;

    fn binary_lp(obj: Vec<f64>) -> LpInstance {
        let n = obj.len();
        let mut lp = LpInstance::new(obj);
        for j in 0..n {
            lp.set_bounds(j, 0.0, 1.0);
        }
        lp
    }

    #[test]
    fn dominance_example() {
        let mut lp = binary_lp(vec![-3.0, -2.0]);
        lp.add_row(vec![1.0, 1.0], Relation::Le, 1.0);
        let sol = solve_mip(&MipInstance::new(lp, vec![0, 1])).unwrap();
        assert_eq!(sol.status, MipStatus::Optimal);
        assert_eq!(sol.incumbent, vec![1.0, 0.0]);
        assert_eq!(sol.objective, -3.0);
    }

    #[test]
    fn knapsack_matches_enumeration() {
        let values = [3.0, 4.0, 5.0];
        let weights = [2.0, 3.0, 4.0];
        let mut lp = binary_lp(values.iter().map(|v| -v).collect());
        lp.add_row(weights.to_vec(), Relation::Le, 5.0);
        let sol = solve_mip(&MipInstance::new(lp, vec![0, 1, 2])).unwrap();

        let mut best = f64::INFINITY;
        for mask in 0..8u32 {
            let pick = |i: usize| ((mask >> i) & 1) as f64;
            let w: f64 = (0..3).map(|i| weights[i] * pick(i)).sum();
            if w <= 5.0 {
                best = best.min(-(0..3).map(|i| values[i] * pick(i)).sum::<f64>());
            }
        }
        assert_eq!(best, -7.0);
        assert!((sol.objective - best).abs() < 1e-9);
        assert_eq!(sol.incumbent, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn integral_relaxation_needs_no_branching() {
        let mut lp = binary_lp(vec![1.0, 2.0]);
        lp.add_row(vec![1.0, 1.0], Relation::Ge, 1.0);
        let mip = MipInstance::new(lp.clone(), vec![0, 1]);
        let sol = solve_mip(&mip).unwrap();
        let relax = solve_lp(&lp).unwrap();
        assert_eq!(sol.nodes, 1);
        assert!((sol.objective - relax.objective).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = binary_lp(vec![1.0]);
        lp.add_row(vec![1.0], Relation::Ge, 2.0);
        let sol = solve_mip(&MipInstance::new(lp, vec![0])).unwrap();
        assert_eq!(sol.status, MipStatus::Infeasible);

        let mut lp = binary_lp(vec![1.0, -1.0]);
        lp.set_bounds(1, 0.0, f64::INFINITY);
        assert!(matches!(
            solve_mip(&MipInstance::new(lp, vec![0])),
            Err(Error::Unbounded)
        ));
    }

    #[test]
    fn rejects_non_binary_bounds() {
        let lp = LpInstance::new(vec![1.0]);
        assert!(solve_mip(&MipInstance::new(lp, vec![0])).is_err());
    }
}
