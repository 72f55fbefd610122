//! Bounded-variable primal revised simplex.
//!
//! Structure: one logical (slack) column per row, so the all-logical
//! basis is the identity and phase 1 needs no artificial columns —
//! infeasibility lives in bound violations of basic variables and is
//! driven out by a piecewise-linear phase-1 objective. The basis inverse
//! is kept in product form (eta file) and rebuilt by sparse
//! Gauss-Jordan reinversion with threshold pivoting. Rows and columns
//! are equilibrated with power-of-two factors before the solve, so
//! scaling and unscaling are exact in floating point.

use super::{FeasTolerances, LinearProgram, LpError, Sense, Solution, SolveStatus};

const PIVOT_EPS: f64 = 1e-9;
const REINVERT_PIVOT_EPS: f64 = 1e-11;
const DEGENERATE_STEP: f64 = 1e-10;
const BLAND_TRIGGER: usize = 40;
const REFACTOR_INTERVAL: usize = 96;

/// A simplex basis: which variable is basic in each row position, and at
/// which bound every nonbasic variable rests. Reusable across solves of
/// structurally identical programs (warm starts).
#[derive(Debug, Clone)]
pub struct Basis {
    pub basic: Vec<usize>,
    /// Per variable: 0 = at lower, 1 = at upper, 2 = free at zero.
    /// Ignored for basic variables.
    pub nonbasic_state: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    FreeZero,
}

/// One product-form eta: applying it to `v` replaces
/// `v[pivot_row] /= pivot` and then subtracts `entries * v[pivot_row]`.
struct Eta {
    pivot_row: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

fn ftran(etas: &[Eta], v: &mut [f64]) {
    for eta in etas {
        let t = v[eta.pivot_row];
        if t == 0.0 {
            continue;
        }
        let t = t / eta.pivot;
        v[eta.pivot_row] = t;
        for &(r, val) in &eta.entries {
            v[r] -= val * t;
        }
    }
}

fn btran(etas: &[Eta], v: &mut [f64]) {
    for eta in etas.iter().rev() {
        let mut acc = v[eta.pivot_row];
        for &(r, val) in &eta.entries {
            acc -= val * v[r];
        }
        v[eta.pivot_row] = acc / eta.pivot;
    }
}

/// The standardized, scaled instance: structural columns in CSC order
/// plus one implicit logical column per row.
struct StandardForm {
    n_struct: usize,
    m: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    col_scale: Vec<f64>,
}

impl StandardForm {
    fn total_vars(&self) -> usize {
        self.n_struct + self.m
    }

    fn col_nnz(&self, var: usize) -> usize {
        if var < self.n_struct {
            self.col_ptr[var + 1] - self.col_ptr[var]
        } else {
            1
        }
    }

    /// Scatters column `var` into the dense buffer (assumed zeroed).
    fn scatter_col(&self, var: usize, buf: &mut [f64]) {
        if var < self.n_struct {
            for k in self.col_ptr[var]..self.col_ptr[var + 1] {
                buf[self.row_idx[k]] = self.values[k];
            }
        } else {
            buf[var - self.n_struct] = 1.0;
        }
    }

    /// Dot product of column `var` with a dense row vector.
    fn col_dot(&self, var: usize, y: &[f64]) -> f64 {
        if var < self.n_struct {
            let mut acc = 0.0;
            for k in self.col_ptr[var]..self.col_ptr[var + 1] {
                acc += self.values[k] * y[self.row_idx[k]];
            }
            acc
        } else {
            y[var - self.n_struct]
        }
    }
}

/// Rounds a positive number to the nearest power of two (exact scaling).
fn pow2_near(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return 1.0;
    }
    let e = x.log2().round() as i32;
    (2.0f64).powi(e.clamp(-60, 60))
}

fn standardize(lp: &LinearProgram) -> StandardForm {
    let n = lp.num_vars;
    let m = lp.rows.len();

    // Merge duplicate indices within each row.
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    for row in &lp.rows {
        let mut sorted = row.coeffs.clone();
        sorted.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(sorted.len());
        for (j, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        rows.push(merged);
    }

    let mut row_scale = vec![1.0f64; m];
    for (i, row) in rows.iter().enumerate() {
        let mx = row.iter().map(|&(_, v)| v.abs()).fold(0.0f64, f64::max);
        if mx > 0.0 {
            row_scale[i] = pow2_near(1.0 / mx);
        }
    }
    let mut col_max = vec![0.0f64; n];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            col_max[j] = col_max[j].max((v * row_scale[i]).abs());
        }
    }
    let col_scale: Vec<f64> = col_max
        .iter()
        .map(|&mx| if mx > 0.0 { pow2_near(1.0 / mx) } else { 1.0 })
        .collect();

    // CSC assembly of the scaled structural columns.
    let mut counts = vec![0usize; n + 1];
    for row in &rows {
        for &(j, _) in row {
            counts[j + 1] += 1;
        }
    }
    for j in 0..n {
        counts[j + 1] += counts[j];
    }
    let nnz = counts[n];
    let col_ptr = counts;
    let mut row_idx = vec![0usize; nnz];
    let mut values = vec![0.0f64; nnz];
    let mut cursor = col_ptr.clone();
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            let k = cursor[j];
            row_idx[k] = i;
            values[k] = v * row_scale[i] * col_scale[j];
            cursor[j] += 1;
        }
    }

    let mut cost = vec![0.0f64; n + m];
    for &(j, c) in &lp.objective {
        cost[j] += c * col_scale[j];
    }

    let mut lower = Vec::with_capacity(n + m);
    let mut upper = Vec::with_capacity(n + m);
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let s = col_scale[j];
        lower.push(if lo.is_finite() { lo / s } else { lo });
        upper.push(if hi.is_finite() { hi / s } else { hi });
    }
    let mut rhs = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        rhs.push(row.rhs * row_scale[i]);
        match row.sense {
            Sense::Le => {
                lower.push(0.0);
                upper.push(f64::INFINITY);
            }
            Sense::Ge => {
                lower.push(f64::NEG_INFINITY);
                upper.push(0.0);
            }
            Sense::Eq => {
                lower.push(0.0);
                upper.push(0.0);
            }
        }
    }

    StandardForm {
        n_struct: n,
        m,
        col_ptr,
        row_idx,
        values,
        cost,
        lower,
        upper,
        rhs,
        col_scale,
    }
}

struct Engine<'a> {
    sf: &'a StandardForm,
    state: Vec<VarState>,
    basic: Vec<usize>,
    x: Vec<f64>,
    etas: Vec<Eta>,
    etas_at_reinvert: usize,
    scratch: Vec<f64>,
    scratch2: Vec<f64>,
    alpha: Vec<f64>,
    alpha_rows: Vec<usize>,
    y: Vec<f64>,
    bland: bool,
    degenerate_run: usize,
    iterations: usize,
}

enum Step {
    Optimal,
    Infeasible,
    Unbounded,
    Pivoted,
}

impl<'a> Engine<'a> {
    fn new(sf: &'a StandardForm) -> Self {
        let nt = sf.total_vars();
        Engine {
            sf,
            state: vec![VarState::AtLower; nt],
            basic: Vec::with_capacity(sf.m),
            x: vec![0.0; nt],
            etas: Vec::new(),
            etas_at_reinvert: 0,
            scratch: vec![0.0; sf.m],
            scratch2: vec![0.0; sf.m],
            alpha: vec![0.0; sf.m],
            alpha_rows: Vec::with_capacity(sf.m),
            y: vec![0.0; sf.m],
            bland: false,
            degenerate_run: 0,
            iterations: 0,
        }
    }

    fn nonbasic_resting_value(&self, v: usize) -> (VarState, f64) {
        let lo = self.sf.lower[v];
        let hi = self.sf.upper[v];
        if lo.is_finite() {
            (VarState::AtLower, lo)
        } else if hi.is_finite() {
            (VarState::AtUpper, hi)
        } else {
            (VarState::FreeZero, 0.0)
        }
    }

    fn cold_start(&mut self) {
        let n = self.sf.n_struct;
        for v in 0..n {
            let (st, val) = self.nonbasic_resting_value(v);
            self.state[v] = st;
            self.x[v] = val;
        }
        self.basic.clear();
        for i in 0..self.sf.m {
            self.basic.push(n + i);
            self.state[n + i] = VarState::Basic(i);
        }
        self.etas.clear();
        self.etas_at_reinvert = 0;
        self.recompute_basic_values();
    }

    fn warm_start(&mut self, basis: &Basis) -> bool {
        let nt = self.sf.total_vars();
        if basis.basic.len() != self.sf.m
            || basis.nonbasic_state.len() != nt
            || basis.basic.iter().any(|&v| v >= nt)
        {
            return false;
        }
        let mut seen = vec![false; nt];
        for &v in &basis.basic {
            if seen[v] {
                return false;
            }
            seen[v] = true;
        }
        for v in 0..nt {
            if seen[v] {
                continue;
            }
            let (st, val) = match basis.nonbasic_state[v] {
                0 if self.sf.lower[v].is_finite() => (VarState::AtLower, self.sf.lower[v]),
                1 if self.sf.upper[v].is_finite() => (VarState::AtUpper, self.sf.upper[v]),
                2 => (VarState::FreeZero, 0.0),
                _ => self.nonbasic_resting_value(v),
            };
            self.state[v] = st;
            self.x[v] = val;
        }
        self.basic = basis.basic.clone();
        for (pos, &v) in self.basic.iter().enumerate() {
            self.state[v] = VarState::Basic(pos);
        }
        if self.reinvert().is_err() {
            return false;
        }
        self.recompute_basic_values();
        true
    }

    fn export_basis(&self) -> Basis {
        let nt = self.sf.total_vars();
        let mut nonbasic_state = vec![0u8; nt];
        for v in 0..nt {
            nonbasic_state[v] = match self.state[v] {
                VarState::AtUpper => 1,
                VarState::FreeZero => 2,
                _ => 0,
            };
        }
        Basis {
            basic: self.basic.clone(),
            nonbasic_state,
        }
    }

    /// Rebuilds the eta file from the current basic set by sparse
    /// Gauss-Jordan elimination. Singular columns are replaced by the
    /// logical of an unpivoted row (basis repair).
    fn reinvert(&mut self) -> Result<(), LpError> {
        self.etas.clear();
        let m = self.sf.m;
        let n = self.sf.n_struct;

        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&pos| (self.sf.col_nnz(self.basic[pos]), self.basic[pos]));

        let mut row_taken = vec![false; m];
        let mut new_home = vec![usize::MAX; m];
        let mut dropped: Vec<usize> = Vec::new();

        for &pos in &order {
            let var = self.basic[pos];
            self.scratch.iter_mut().for_each(|v| *v = 0.0);
            self.sf.scatter_col(var, &mut self.scratch);
            ftran(&self.etas, &mut self.scratch);

            let mut best_row = usize::MAX;
            let mut best_abs = REINVERT_PIVOT_EPS;
            for r in 0..m {
                if !row_taken[r] {
                    let a = self.scratch[r].abs();
                    if a > best_abs {
                        best_abs = a;
                        best_row = r;
                    }
                }
            }
            if best_row == usize::MAX {
                dropped.push(pos);
                continue;
            }
            row_taken[best_row] = true;
            new_home[pos] = best_row;
            let pivot = self.scratch[best_row];
            let mut entries = Vec::new();
            for r in 0..m {
                if r != best_row && self.scratch[r] != 0.0 {
                    entries.push((r, self.scratch[r]));
                }
            }
            self.etas.push(Eta {
                pivot_row: best_row,
                pivot,
                entries,
            });
        }

        // Re-home surviving basic variables, then patch unpivoted rows
        // with their own logicals (those pass through the eta file
        // untouched, so their pivot is exactly 1).
        let old_basic = self.basic.clone();
        for (pos, &var) in old_basic.iter().enumerate() {
            if new_home[pos] != usize::MAX {
                self.basic[new_home[pos]] = var;
                self.state[var] = VarState::Basic(new_home[pos]);
            }
        }
        for &pos in &dropped {
            let var = old_basic[pos];
            let (st, val) = self.nonbasic_resting_value(var);
            self.state[var] = st;
            self.x[var] = val;
        }
        for r in 0..m {
            if !row_taken[r] {
                let logical = n + r;
                if !matches!(self.state[logical], VarState::Basic(_)) {
                    self.basic[r] = logical;
                    self.state[logical] = VarState::Basic(r);
                } else {
                    return Err(LpError::Numerical(format!(
                        "basis repair failed: logical of row {r} already basic"
                    )));
                }
            }
        }
        self.etas_at_reinvert = self.etas.len();
        Ok(())
    }

    /// x_B = B^{-1} (b − N x_N), followed by one refinement round.
    fn recompute_basic_values(&mut self) {
        let m = self.sf.m;
        self.scratch.copy_from_slice(&self.sf.rhs);
        for v in 0..self.sf.total_vars() {
            if matches!(self.state[v], VarState::Basic(_)) {
                continue;
            }
            let xv = self.x[v];
            if xv != 0.0 {
                if v < self.sf.n_struct {
                    for k in self.sf.col_ptr[v]..self.sf.col_ptr[v + 1] {
                        self.scratch[self.sf.row_idx[k]] -= self.sf.values[k] * xv;
                    }
                } else {
                    self.scratch[v - self.sf.n_struct] -= xv;
                }
            }
        }
        let rhs_reduced = self.scratch.clone();
        ftran(&self.etas, &mut self.scratch);
        for i in 0..m {
            self.x[self.basic[i]] = self.scratch[i];
        }

        // One round of iterative refinement on the basic system.
        self.scratch2.copy_from_slice(&rhs_reduced);
        for i in 0..m {
            let v = self.basic[i];
            let xv = self.x[v];
            if xv != 0.0 {
                if v < self.sf.n_struct {
                    for k in self.sf.col_ptr[v]..self.sf.col_ptr[v + 1] {
                        self.scratch2[self.sf.row_idx[k]] -= self.sf.values[k] * xv;
                    }
                } else {
                    self.scratch2[v - self.sf.n_struct] -= xv;
                }
            }
        }
        ftran(&self.etas, &mut self.scratch2);
        for i in 0..m {
            let d = self.scratch2[i];
            if d != 0.0 {
                self.x[self.basic[i]] += d;
            }
        }
    }

    fn total_infeasibility(&self, feas_tol: f64) -> f64 {
        let mut total = 0.0;
        for &v in &self.basic {
            let xv = self.x[v];
            let below = self.sf.lower[v] - xv;
            let above = xv - self.sf.upper[v];
            if below > feas_tol {
                total += below;
            }
            if above > feas_tol {
                total += above;
            }
        }
        total
    }

    /// One simplex iteration for the given phase objective.
    fn step(&mut self, phase1: bool, tol: &FeasTolerances) -> Result<Step, LpError> {
        let m = self.sf.m;
        let feas_tol = tol.feasibility;
        let opt_tol = tol.optimality;

        // Phase objective on basic variables.
        for i in 0..m {
            let v = self.basic[i];
            self.y[i] = if phase1 {
                let xv = self.x[v];
                if self.sf.lower[v] - xv > feas_tol {
                    -1.0
                } else if xv - self.sf.upper[v] > feas_tol {
                    1.0
                } else {
                    0.0
                }
            } else {
                self.sf.cost[v]
            };
        }
        btran(&self.etas, &mut self.y);

        // Pricing.
        let mut enter = usize::MAX;
        let mut enter_score = opt_tol;
        let mut enter_dir = 1.0;
        for v in 0..self.sf.total_vars() {
            let (favorable_dir, score) = match self.state[v] {
                VarState::Basic(_) => continue,
                st => {
                    let c = if phase1 { 0.0 } else { self.sf.cost[v] };
                    let d = c - self.sf.col_dot(v, &self.y);
                    match st {
                        VarState::AtLower => (1.0, -d),
                        VarState::AtUpper => (-1.0, d),
                        VarState::FreeZero => {
                            if d < 0.0 {
                                (1.0, -d)
                            } else {
                                (-1.0, d)
                            }
                        }
                        VarState::Basic(_) => unreachable!(),
                    }
                }
            };
            if score > enter_score {
                enter = v;
                enter_score = score;
                enter_dir = favorable_dir;
                if self.bland {
                    break; // lowest favorable index wins under Bland's rule
                }
            }
        }
        if enter == usize::MAX {
            return Ok(if phase1 { Step::Infeasible } else { Step::Optimal });
        }

        // FTRAN the entering column.
        self.alpha.iter_mut().for_each(|v| *v = 0.0);
        self.sf.scatter_col(enter, &mut self.alpha);
        ftran(&self.etas, &mut self.alpha);
        self.alpha_rows.clear();
        for r in 0..m {
            if self.alpha[r] != 0.0 {
                self.alpha_rows.push(r);
            }
        }

        // Ratio test: first blocking breakpoint.
        let mut t_min = f64::INFINITY;
        let mut leave_pos = usize::MAX;
        let mut leave_bound = VarState::AtLower;
        let mut leave_abs_alpha = 0.0;
        for &r in &self.alpha_rows {
            let delta = -enter_dir * self.alpha[r];
            if delta.abs() <= PIVOT_EPS {
                continue;
            }
            let v = self.basic[r];
            let xv = self.x[v];
            let lo = self.sf.lower[v];
            let hi = self.sf.upper[v];
            let below = lo - xv > feas_tol;
            let above = xv - hi > feas_tol;

            let (t_block, bound) = if phase1 && below {
                if delta > 0.0 {
                    ((lo - xv) / delta, VarState::AtLower)
                } else {
                    continue;
                }
            } else if phase1 && above {
                if delta < 0.0 {
                    ((hi - xv) / delta, VarState::AtUpper)
                } else {
                    continue;
                }
            } else if delta > 0.0 {
                if hi.is_finite() {
                    (((hi - xv) / delta).max(0.0), VarState::AtUpper)
                } else {
                    continue;
                }
            } else if lo.is_finite() {
                (((lo - xv) / delta).max(0.0), VarState::AtLower)
            } else {
                continue;
            };

            let better = if self.bland {
                t_block < t_min - 1e-12
                    || (t_block < t_min + 1e-12
                        && leave_pos != usize::MAX
                        && v < self.basic[leave_pos])
                    || leave_pos == usize::MAX && t_block <= t_min
            } else {
                t_block < t_min - 1e-12
                    || (t_block < t_min + 1e-12 && self.alpha[r].abs() > leave_abs_alpha)
            };
            if better {
                t_min = t_block.max(0.0);
                leave_pos = r;
                leave_bound = bound;
                leave_abs_alpha = self.alpha[r].abs();
            }
        }

        // The entering variable's own opposite bound (bound flip).
        let enter_range = if enter_dir > 0.0 {
            self.sf.upper[enter] - self.x[enter]
        } else {
            self.x[enter] - self.sf.lower[enter]
        };
        if enter_range.is_finite() && enter_range <= t_min {
            // Bound flip: no basis change.
            let t = enter_range;
            for &r in &self.alpha_rows {
                self.x[self.basic[r]] -= enter_dir * t * self.alpha[r];
            }
            self.x[enter] += enter_dir * t;
            self.state[enter] = if enter_dir > 0.0 {
                VarState::AtUpper
            } else {
                VarState::AtLower
            };
            self.x[enter] = if enter_dir > 0.0 {
                self.sf.upper[enter]
            } else {
                self.sf.lower[enter]
            };
            self.note_step_size(t);
            return Ok(Step::Pivoted);
        }

        if leave_pos == usize::MAX {
            if phase1 {
                return Err(LpError::Numerical(
                    "phase-1 direction unblocked; infeasibility is bounded below".into(),
                ));
            }
            return Ok(Step::Unbounded);
        }

        let pivot = self.alpha[leave_pos];
        if pivot.abs() < PIVOT_EPS {
            return Err(LpError::Numerical(format!(
                "pivot {pivot:.3e} below threshold"
            )));
        }

        // Pivot: update values, statuses, eta file.
        let t = t_min;
        for &r in &self.alpha_rows {
            if r != leave_pos {
                self.x[self.basic[r]] -= enter_dir * t * self.alpha[r];
            }
        }
        let leaving = self.basic[leave_pos];
        self.x[enter] += enter_dir * t;
        self.x[leaving] = match leave_bound {
            VarState::AtLower => self.sf.lower[leaving],
            VarState::AtUpper => self.sf.upper[leaving],
            _ => unreachable!(),
        };
        self.state[leaving] = leave_bound;
        self.state[enter] = VarState::Basic(leave_pos);
        self.basic[leave_pos] = enter;

        let mut entries = Vec::with_capacity(self.alpha_rows.len());
        for &r in &self.alpha_rows {
            if r != leave_pos {
                entries.push((r, self.alpha[r]));
            }
        }
        self.etas.push(Eta {
            pivot_row: leave_pos,
            pivot,
            entries,
        });

        self.note_step_size(t);
        Ok(Step::Pivoted)
    }

    fn note_step_size(&mut self, t: f64) {
        if t < DEGENERATE_STEP {
            self.degenerate_run += 1;
            if self.degenerate_run >= BLAND_TRIGGER {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    fn run(&mut self, tol: &FeasTolerances, iter_limit: usize) -> Result<SolveStatus, LpError> {
        let mut numerical_retries = 0;
        loop {
            if self.iterations >= iter_limit {
                return Err(LpError::IterationLimit {
                    iterations: self.iterations,
                });
            }
            if self.etas.len() >= self.etas_at_reinvert + REFACTOR_INTERVAL {
                self.reinvert()?;
                self.recompute_basic_values();
            }
            let phase1 = self.total_infeasibility(tol.feasibility) > tol.feasibility;
            match self.step(phase1, tol) {
                Ok(Step::Pivoted) => {
                    self.iterations += 1;
                }
                Ok(Step::Optimal) => {
                    // Verify on a fresh factorization before declaring.
                    self.reinvert()?;
                    self.recompute_basic_values();
                    if self.total_infeasibility(tol.feasibility) > tol.feasibility {
                        // Refreshed values drifted back to phase 1.
                        continue;
                    }
                    return Ok(SolveStatus::Optimal);
                }
                Ok(Step::Infeasible) => {
                    self.reinvert()?;
                    self.recompute_basic_values();
                    let inf = self.total_infeasibility(tol.feasibility);
                    if inf <= tol.feasibility {
                        continue; // feasibility was a stale artifact
                    }
                    return Ok(SolveStatus::Infeasible);
                }
                Ok(Step::Unbounded) => return Ok(SolveStatus::Unbounded),
                Err(LpError::Numerical(msg)) => {
                    numerical_retries += 1;
                    if numerical_retries > 4 {
                        return Err(LpError::Numerical(msg));
                    }
                    self.reinvert()?;
                    self.recompute_basic_values();
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Solves an LP cold. See [`solve_lp_warm`] for basis reuse.
pub fn solve_lp(lp: &LinearProgram, tol: &FeasTolerances) -> Result<Solution, LpError> {
    solve_lp_warm(lp, tol, None).map(|(s, _)| s)
}

/// Solves an LP, optionally starting from a previous basis. Returns the
/// solution together with the final basis for later warm starts.
pub fn solve_lp_warm(
    lp: &LinearProgram,
    tol: &FeasTolerances,
    warm: Option<&Basis>,
) -> Result<(Solution, Basis), LpError> {
    lp.validate()?;
    let sf = standardize(lp);
    let mut eng = Engine::new(&sf);
    let warmed = match warm {
        Some(b) => eng.warm_start(b),
        None => false,
    };
    if !warmed {
        eng.cold_start();
    }
    let iter_limit = tol.effective_iteration_limit(lp.num_vars, lp.rows.len());
    let status = eng.run(tol, iter_limit)?;
    let basis = eng.export_basis();

    let mut primal = vec![0.0; lp.num_vars];
    for j in 0..lp.num_vars {
        let mut v = eng.x[j] * sf.col_scale[j];
        // Snap values that are within rounding distance of a bound.
        let (lo, hi) = lp.bounds[j];
        if lo.is_finite() && (v - lo).abs() < 1e-9 {
            v = lo;
        } else if hi.is_finite() && (v - hi).abs() < 1e-9 {
            v = hi;
        }
        primal[j] = v;
    }

    let solution = match status {
        SolveStatus::Optimal => Solution {
            status,
            objective_value: super::objective_at(lp, &primal),
            primal,
            mip_gap: 0.0,
            iterations: eng.iterations,
            infeasible_rows: Vec::new(),
        },
        SolveStatus::Infeasible => {
            // Attribute residual infeasibility to rows: a logical out of
            // range pins its own row; structural bound violations are
            // reported against the rows they appear in.
            let mut rows: Vec<(usize, f64)> = Vec::new();
            for &v in &eng.basic {
                let xv = eng.x[v];
                let gap = (sf.lower[v] - xv).max(xv - sf.upper[v]);
                if gap > tol.feasibility {
                    if v >= sf.n_struct {
                        rows.push((v - sf.n_struct, gap));
                    } else {
                        for k in sf.col_ptr[v]..sf.col_ptr[v + 1] {
                            rows.push((sf.row_idx[k], gap));
                        }
                    }
                }
            }
            rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            rows.dedup_by_key(|e| e.0);
            Solution {
                status,
                objective_value: eng.total_infeasibility(tol.feasibility),
                primal,
                mip_gap: 0.0,
                iterations: eng.iterations,
                infeasible_rows: rows,
            }
        }
        SolveStatus::Unbounded => Solution {
            status,
            objective_value: f64::NEG_INFINITY,
            primal,
            mip_gap: 0.0,
            iterations: eng.iterations,
            infeasible_rows: Vec::new(),
        },
    };
    Ok((solution, basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tol() -> FeasTolerances {
        FeasTolerances::default()
    }

    #[test]
    fn one_variable_bound() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, f64::INFINITY, -1.0);
        lp.add_row("cap", Sense::Le, 1.0, &[(x, 1.0)]);
        let sol = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.primal[x], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.objective_value, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn symmetric_split_objective() {
        let mut lp = LinearProgram::new();
        let x1 = lp.add_var("x1", 0.0, f64::INFINITY, 1.0);
        let x2 = lp.add_var("x2", 0.0, f64::INFINITY, 1.0);
        lp.add_row("cover", Sense::Ge, 2.0, &[(x1, 1.0), (x2, 1.0)]);
        let sol = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.objective_value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, f64::INFINITY, 1.0);
        lp.add_row("lo", Sense::Ge, 10.0, &[(x, 1.0)]);
        lp.add_row("hi", Sense::Le, 5.0, &[(x, 1.0)]);
        let sol = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(!sol.infeasible_rows.is_empty());
        assert!(sol.objective_value > tol().feasibility);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, f64::INFINITY, -1.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY, 0.0);
        lp.add_row("link", Sense::Le, 3.0, &[(x, 1.0), (y, -1.0)]);
        let sol = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn equality_and_upper_bounds() {
        // min x + 2y  s.t. x + y = 4, x <= 3, y <= 3
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 3.0, 1.0);
        let y = lp.add_var("y", 0.0, 3.0, 2.0);
        lp.add_row("sum", Sense::Eq, 4.0, &[(x, 1.0), (y, 1.0)]);
        let sol = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.primal[x], 3.0, epsilon = 1e-9);
        assert_relative_eq!(sol.primal[y], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.objective_value, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn free_variable() {
        // min |style| objective with a free variable pinned by equalities.
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        let y = lp.add_var("y", 0.0, f64::INFINITY, 0.0);
        lp.add_row("eq", Sense::Eq, -5.0, &[(x, 1.0), (y, -1.0)]);
        lp.add_row("cap", Sense::Le, 2.0, &[(y, 1.0)]);
        let sol = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.primal[x], -5.0, epsilon = 1e-9);
        assert_relative_eq!(sol.objective_value, -5.0, epsilon = 1e-9);
    }

    #[test]
    fn negative_rhs_ge() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        lp.add_row("floor", Sense::Ge, -3.0, &[(x, 1.0)]);
        let sol = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.primal[x], -3.0, epsilon = 1e-9);
    }

    #[test]
    fn warm_start_reaches_same_optimum() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 10.0, -2.0);
        let y = lp.add_var("y", 0.0, 10.0, -3.0);
        lp.add_row("r1", Sense::Le, 14.0, &[(x, 1.0), (y, 2.0)]);
        lp.add_row("r2", Sense::Le, 9.0, &[(x, 1.0), (y, 1.0)]);
        let (cold, basis) = solve_lp_warm(&lp, &tol(), None).unwrap();
        assert_eq!(cold.status, SolveStatus::Optimal);

        // Perturb a bound and re-solve warm.
        let mut lp2 = lp.clone();
        lp2.bounds[x] = (0.0, 3.0);
        let (warm, _) = solve_lp_warm(&lp2, &tol(), Some(&basis)).unwrap();
        let (fresh, _) = solve_lp_warm(&lp2, &tol(), None).unwrap();
        assert_eq!(warm.status, SolveStatus::Optimal);
        assert_relative_eq!(warm.objective_value, fresh.objective_value, epsilon = 1e-8);
    }

    #[test]
    fn deterministic_repeat() {
        let mut lp = LinearProgram::new();
        for j in 0..6 {
            lp.add_var(format!("x{j}"), 0.0, 4.0, ((j as f64) - 2.5) * 0.7);
        }
        lp.add_row("r1", Sense::Le, 10.0, &[(0, 1.0), (2, 2.0), (4, 1.0)]);
        lp.add_row("r2", Sense::Ge, 3.0, &[(1, 1.0), (3, 1.0), (5, 2.0)]);
        lp.add_row("r3", Sense::Eq, 5.0, &[(0, 1.0), (1, 1.0), (2, 1.0)]);
        let a = solve_lp(&lp, &tol()).unwrap();
        let b = solve_lp(&lp, &tol()).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
        for (x, y) in a.primal.iter().zip(&b.primal) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 10.0, -1.0);
        let y = lp.add_var("y", 0.0, 10.0, -1.0);
        lp.add_row("r", Sense::Le, 12.0, &[(x, 1.0), (y, 1.0)]);
        let t = FeasTolerances {
            iteration_limit: Some(0),
            ..FeasTolerances::default()
        };
        match solve_lp(&lp, &t) {
            Err(LpError::IterationLimit { .. }) => {}
            other => panic!("expected iteration limit, got {other:?}"),
        }
    }
}
