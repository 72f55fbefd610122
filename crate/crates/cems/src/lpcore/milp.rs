//! Best-first branch-and-bound over binary variables.
//!
//! Node relaxations are solved by the revised simplex with a warm start
//! from the most recently solved basis; branching picks the most
//! fractional binary. The search is exact up to the caller's absolute
//! gap: a node is pruned only when its relaxation bound cannot improve
//! the incumbent by more than `gap`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::simplex::{solve_lp_warm, Basis};
use super::{FeasTolerances, LpError, MilpProblem, Solution, SolveStatus};

const INT_TOL: f64 = 1e-6;
const DEFAULT_NODE_LIMIT: usize = 100_000;

struct Node {
    bound: f64,
    seq: u64,
    fixes: Vec<(usize, bool)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap; invert so the smallest bound pops first,
    // ties resolved by creation order for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn most_fractional(binaries: &[usize], x: &[f64]) -> Option<usize> {
    let mut best = None;
    let mut best_frac = INT_TOL;
    for &v in binaries {
        let frac = x[v].min(1.0 - x[v]);
        if frac > best_frac {
            best_frac = frac;
            best = Some(v);
        }
    }
    best
}

/// Solves a mixed binary-continuous program to within absolute `gap`.
pub fn solve_milp(p: &MilpProblem, tol: &FeasTolerances, gap: f64) -> Result<Solution, LpError> {
    solve_milp_limited(p, tol, gap, DEFAULT_NODE_LIMIT)
}

/// As [`solve_milp`] with an explicit node budget.
pub fn solve_milp_limited(
    p: &MilpProblem,
    tol: &FeasTolerances,
    gap: f64,
    node_limit: usize,
) -> Result<Solution, LpError> {
    p.validate()?;
    if gap < 0.0 {
        return Err(LpError::Structural(format!("gap must be ≥ 0, got {gap}")));
    }

    let mut lp = p.lp.clone();
    let base_bounds = lp.bounds.clone();

    let (root, mut last_basis) = solve_lp_warm(&lp, tol, None)?;
    match root.status {
        SolveStatus::Infeasible | SolveStatus::Unbounded => return Ok(root),
        SolveStatus::Optimal => {}
    }

    let mut total_iterations = root.iterations;
    let mut incumbent: Option<Solution> = None;
    let mut proved_lb = f64::INFINITY;
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: root.objective_value,
        seq,
        fixes: Vec::new(),
    });

    let mut nodes = 0usize;
    while let Some(node) = heap.pop() {
        let cutoff = incumbent
            .as_ref()
            .map(|s| s.objective_value - gap)
            .unwrap_or(f64::INFINITY);
        if node.bound >= cutoff - 1e-12 {
            proved_lb = proved_lb.min(node.bound);
            continue;
        }
        nodes += 1;
        if nodes > node_limit {
            return Err(LpError::NodeLimit {
                nodes: nodes - 1,
                incumbent: incumbent.as_ref().map(|s| s.objective_value),
                bound: node.bound,
            });
        }

        lp.bounds.copy_from_slice(&base_bounds);
        for &(v, up) in &node.fixes {
            lp.bounds[v] = if up { (1.0, 1.0) } else { (0.0, 0.0) };
        }

        let (sol, basis) = solve_lp_warm(&lp, tol, Some(&last_basis))?;
        last_basis = basis;
        total_iterations += sol.iterations;
        match sol.status {
            SolveStatus::Infeasible => continue,
            SolveStatus::Unbounded => {
                // A restricted child cannot be unbounded if the root was
                // bounded; treat as numerical trouble.
                return Err(LpError::Numerical(
                    "child relaxation reported unbounded below a bounded root".into(),
                ));
            }
            SolveStatus::Optimal => {}
        }
        if sol.objective_value >= cutoff - 1e-12 {
            proved_lb = proved_lb.min(sol.objective_value);
            continue;
        }

        match most_fractional(&p.binary_vars, &sol.primal) {
            None => {
                let better = incumbent
                    .as_ref()
                    .map(|inc| sol.objective_value < inc.objective_value - 1e-12)
                    .unwrap_or(true);
                if better {
                    incumbent = Some(clean_incumbent(&mut lp, p, tol, sol, &mut last_basis)?);
                }
            }
            Some(v) => {
                for up in [false, true] {
                    let mut fixes = node.fixes.clone();
                    fixes.push((v, up));
                    seq += 1;
                    heap.push(Node {
                        bound: sol.objective_value,
                        seq,
                        fixes,
                    });
                }
            }
        }
    }

    lp.bounds.copy_from_slice(&base_bounds);
    match incumbent {
        Some(mut sol) => {
            let lb = proved_lb.min(sol.objective_value);
            sol.mip_gap = (sol.objective_value - lb).max(0.0);
            sol.iterations = total_iterations;
            Ok(sol)
        }
        None => Ok(Solution {
            status: SolveStatus::Infeasible,
            objective_value: f64::INFINITY,
            primal: vec![0.0; p.lp.num_vars],
            mip_gap: 0.0,
            iterations: total_iterations,
            infeasible_rows: Vec::new(),
        }),
    }
}

/// Re-solves with all binaries pinned to their rounded values so the
/// reported point carries exactly integral binaries.
fn clean_incumbent(
    lp: &mut super::LinearProgram,
    p: &MilpProblem,
    tol: &FeasTolerances,
    raw: Solution,
    last_basis: &mut Basis,
) -> Result<Solution, LpError> {
    let prior_bounds = lp.bounds.clone();
    for &v in &p.binary_vars {
        let rounded = if raw.primal[v] >= 0.5 { 1.0 } else { 0.0 };
        lp.bounds[v] = (rounded, rounded);
    }
    let result = solve_lp_warm(lp, tol, Some(last_basis));
    lp.bounds = prior_bounds;
    match result {
        Ok((mut sol, basis)) if sol.status == SolveStatus::Optimal => {
            *last_basis = basis;
            sol.iterations = raw.iterations;
            Ok(sol)
        }
        _ => Ok(raw),
    }
}
