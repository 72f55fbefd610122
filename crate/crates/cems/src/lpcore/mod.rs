//! Self-contained sparse LP solver (bounded-variable revised simplex with
//! a product-form basis inverse) plus a best-first branch-and-bound layer
//! for binary variables.
//!
//! The formulation this crate serves has exactly one source of
//! integrality — the per-step charge/discharge exclusion pair — so the
//! branch-and-bound layer stays deliberately simple: LP relaxations with
//! warm-started bases, most-fractional branching, absolute gap control.
//!
//! Solves are deterministic: identical inputs produce bit-identical
//! outputs. All tie-breaking is by lowest index.

mod dump;
mod milp;
mod simplex;

pub use dump::{dump_lp, parse_dump};
pub use milp::solve_milp;
pub use simplex::{solve_lp, solve_lp_warm, Basis};

use thiserror::Error;

/// Row sense of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl std::fmt::Display for Sense {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Eq => write!(f, "="),
            Sense::Ge => write!(f, ">="),
        }
    }
}

/// One constraint row: a sparse left-hand side, a sense, and a right-hand
/// side. Names are diagnostic only.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub name: String,
}

/// A sparse linear program in minimization form.
///
/// Variables default to bounds `[0, +inf)`. The optional
/// `objective_offset` is a constant added to every reported objective
/// value (used when fixed commitments are folded out of a model).
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<(usize, f64)>,
    pub rows: Vec<Row>,
    pub bounds: Vec<(f64, f64)>,
    pub var_names: Vec<String>,
    pub objective_offset: f64,
}

impl LinearProgram {
    pub fn new() -> Self {
        LinearProgram::default()
    }

    /// Adds a variable and returns its column index.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        let idx = self.num_vars;
        self.num_vars += 1;
        self.bounds.push((lower, upper));
        self.var_names.push(name.into());
        if cost != 0.0 {
            self.objective.push((idx, cost));
        }
        idx
    }

    /// Adds `delta` to the objective coefficient of `var`.
    pub fn add_obj(&mut self, var: usize, delta: f64) {
        if delta != 0.0 {
            self.objective.push((var, delta));
        }
    }

    /// Appends a constraint row; zero coefficients are dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        sense: Sense,
        rhs: f64,
        coeffs: &[(usize, f64)],
    ) -> usize {
        let row = Row {
            coeffs: coeffs.iter().copied().filter(|(_, v)| *v != 0.0).collect(),
            sense,
            rhs,
            name: name.into(),
        };
        self.rows.push(row);
        self.rows.len() - 1
    }

    /// Structural validation; mirrors the type invariants.
    pub fn validate(&self) -> Result<(), LpError> {
        if self.bounds.len() != self.num_vars || self.var_names.len() != self.num_vars {
            return Err(LpError::Structural(format!(
                "bounds/names length mismatch: {} vars, {} bounds, {} names",
                self.num_vars,
                self.bounds.len(),
                self.var_names.len()
            )));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(LpError::Structural(format!(
                    "variable {} ({}) has invalid bounds [{lo}, {hi}]",
                    j, self.var_names[j]
                )));
            }
        }
        for (j, c) in &self.objective {
            if *j >= self.num_vars {
                return Err(LpError::Structural(format!(
                    "objective references variable {j} out of {}",
                    self.num_vars
                )));
            }
            if !c.is_finite() {
                return Err(LpError::Structural(format!(
                    "objective coefficient for variable {j} is not finite"
                )));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in &row.coeffs {
                if *j >= self.num_vars {
                    return Err(LpError::Structural(format!(
                        "row {i} ({}) references variable {j} out of {}",
                        row.name, self.num_vars
                    )));
                }
                if !v.is_finite() {
                    return Err(LpError::Structural(format!(
                        "row {i} ({}) has a non-finite coefficient on variable {j}",
                        row.name
                    )));
                }
            }
            if !row.rhs.is_finite() {
                return Err(LpError::Structural(format!(
                    "row {i} ({}) has non-finite rhs {}",
                    row.name, row.rhs
                )));
            }
        }
        Ok(())
    }
}

/// A linear program plus the set of variables restricted to {0, 1}.
#[derive(Debug, Clone)]
pub struct MilpProblem {
    pub lp: LinearProgram,
    pub binary_vars: Vec<usize>,
}

impl MilpProblem {
    pub fn validate(&self) -> Result<(), LpError> {
        self.lp.validate()?;
        for &v in &self.binary_vars {
            if v >= self.lp.num_vars {
                return Err(LpError::Structural(format!(
                    "binary variable {v} out of {}",
                    self.lp.num_vars
                )));
            }
            let (lo, hi) = self.lp.bounds[v];
            if lo < -1e-12 || hi > 1.0 + 1e-12 {
                return Err(LpError::Structural(format!(
                    "binary variable {v} ({}) has bounds [{lo}, {hi}] outside [0, 1]",
                    self.lp.var_names[v]
                )));
            }
        }
        Ok(())
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver result. For infeasible problems `objective_value` carries the
/// phase-1 infeasibility total and `infeasible_rows` the per-row
/// residuals for attribution; `mip_gap` is 0 for plain LPs.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub primal: Vec<f64>,
    pub mip_gap: f64,
    pub iterations: usize,
    /// `(row index, violation)` at the phase-1 optimum, largest first.
    pub infeasible_rows: Vec<(usize, f64)>,
}

/// Numerical tolerances and the iteration budget.
#[derive(Debug, Clone, Copy)]
pub struct FeasTolerances {
    pub feasibility: f64,
    pub optimality: f64,
    /// Simplex iteration cap; `None` means `50 × (num_vars + num_rows)`.
    pub iteration_limit: Option<usize>,
}

impl Default for FeasTolerances {
    fn default() -> Self {
        FeasTolerances {
            feasibility: 1e-7,
            optimality: 1e-7,
            iteration_limit: None,
        }
    }
}

impl FeasTolerances {
    pub(crate) fn effective_iteration_limit(&self, num_vars: usize, num_rows: usize) -> usize {
        self.iteration_limit.unwrap_or(50 * (num_vars + num_rows))
    }
}

/// Solver errors. Status outcomes (infeasible/unbounded) are `Solution`
/// values, not errors; errors are malformed inputs or exhausted budgets.
#[derive(Debug, Clone, Error)]
pub enum LpError {
    #[error("structural violation: {0}")]
    Structural(String),
    #[error("iteration limit exhausted after {iterations} simplex iterations")]
    IterationLimit { iterations: usize },
    #[error(
        "node limit exhausted after {nodes} nodes (incumbent {incumbent:?}, best bound {bound})"
    )]
    NodeLimit {
        nodes: usize,
        incumbent: Option<f64>,
        bound: f64,
    },
    #[error("numerical breakdown: {0}")]
    Numerical(String),
}

/// Violation of one row by a candidate point, for checking solutions
/// against the instance they came from.
#[derive(Debug, Clone)]
pub struct RowViolation {
    pub row: usize,
    pub name: String,
    pub violation: f64,
}

/// Evaluates every row and bound of `lp` at `point`; returns violations
/// beyond `tol`, largest first.
pub fn check_point(lp: &LinearProgram, point: &[f64], tol: f64) -> Vec<RowViolation> {
    let mut out = Vec::new();
    for (i, row) in lp.rows.iter().enumerate() {
        let lhs: f64 = row.coeffs.iter().map(|&(j, v)| v * point[j]).sum();
        let gap = match row.sense {
            Sense::Le => lhs - row.rhs,
            Sense::Ge => row.rhs - lhs,
            Sense::Eq => (lhs - row.rhs).abs(),
        };
        if gap > tol {
            out.push(RowViolation {
                row: i,
                name: lp.rows[i].name.clone(),
                violation: gap,
            });
        }
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let v = point[j];
        let gap = (lo - v).max(v - hi);
        if gap > tol {
            out.push(RowViolation {
                row: usize::MAX,
                name: format!("bound:{}", lp.var_names[j]),
                violation: gap,
            });
        }
    }
    out.sort_by(|a, b| b.violation.total_cmp(&a.violation));
    out
}

/// Objective value of `point` under `lp`'s objective (offset included).
pub fn objective_at(lp: &LinearProgram, point: &[f64]) -> f64 {
    lp.objective_offset
        + lp.objective
            .iter()
            .map(|&(j, c)| c * point[j])
            .sum::<f64>()
}
