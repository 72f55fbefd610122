//! Shared test support: seeded random solver instances and the
//! independent oracles they are checked against.

use cems::lpcore::{
    check_point, solve_lp, FeasTolerances, LinearProgram, MilpProblem, Sense, SolveStatus,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct RandomLpSpec {
    pub num_vars: usize,
    pub num_rows: usize,
    pub seed: u64,
}

/// A random LP with every variable box-bounded (so the feasible region,
/// if any, is bounded and vertex enumeration is exact).
pub fn random_boxed_lp(spec: &RandomLpSpec) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut lp = LinearProgram::new();
    let mut mid = Vec::with_capacity(spec.num_vars);
    for j in 0..spec.num_vars {
        let upper = 1.0 + (rng.random::<f64>() * 8.0).round();
        let cost = ((rng.random::<f64>() * 10.0 - 5.0) * 2.0).round() / 2.0;
        lp.add_var(format!("x{j}"), 0.0, upper, cost);
        mid.push(upper * rng.random::<f64>());
    }
    for r in 0..spec.num_rows {
        let nnz = 2 + (rng.random::<f64>() * 3.0) as usize;
        let mut coeffs = Vec::new();
        let mut used = vec![false; spec.num_vars];
        for _ in 0..nnz {
            let j = (rng.random::<f64>() * spec.num_vars as f64) as usize % spec.num_vars;
            if used[j] {
                continue;
            }
            used[j] = true;
            let c = ((rng.random::<f64>() * 10.0 - 5.0) * 2.0).round() / 2.0;
            if c != 0.0 {
                coeffs.push((j, c));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((r % spec.num_vars, 1.0));
        }
        let at_mid: f64 = coeffs.iter().map(|&(j, c)| c * mid[j]).sum();
        let slack = rng.random::<f64>() * 6.0 - 1.0;
        let sense = match (rng.random::<f64>() * 3.0) as usize {
            0 => Sense::Le,
            1 => Sense::Ge,
            _ => Sense::Eq,
        };
        let rhs = match sense {
            Sense::Le => at_mid + slack,
            Sense::Ge => at_mid - slack,
            Sense::Eq => at_mid,
        };
        lp.add_row(format!("r{r}"), sense, rhs, &coeffs);
    }
    lp
}

/// Dense Gaussian elimination with partial pivoting; `None` when the
/// system is singular.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Brute-force optimum by enumerating every basic solution of the
/// standard form (all column subsets of [A | I] as basis, nonbasic
/// structurals at either box bound). Entirely independent of the
/// simplex implementation.
pub fn enumerate_boxed_lp(lp: &LinearProgram, tol: f64) -> Option<f64> {
    let n = lp.num_vars;
    let m = lp.rows.len();
    let total = n + m;

    // Dense copy of [A | I] by columns plus logical bounds.
    let mut cols = vec![vec![0.0f64; m]; total];
    for (r, row) in lp.rows.iter().enumerate() {
        for &(j, v) in &row.coeffs {
            cols[j][r] += v;
        }
        cols[n + r][r] = 1.0;
    }
    let mut lower = Vec::with_capacity(total);
    let mut upper = Vec::with_capacity(total);
    for &(lo, hi) in &lp.bounds {
        lower.push(lo);
        upper.push(hi);
    }
    for row in &lp.rows {
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
    let rhs: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();

    let mut best: Option<f64> = None;
    let mut basis = vec![0usize; m];

    // Iterate subsets of size m out of `total` columns.
    fn subsets(
        start: usize,
        depth: usize,
        total: usize,
        basis: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        let m = basis.len();
        if depth == m {
            visit(basis);
            return;
        }
        for c in start..total {
            if total - c < m - depth {
                break;
            }
            basis[depth] = c;
            subsets(c + 1, depth + 1, total, basis, visit);
        }
    }

    let objective: Vec<f64> = {
        let mut c = vec![0.0; total];
        for &(j, v) in &lp.objective {
            c[j] += v;
        }
        c
    };

    let mut visit = |basic: &[usize]| {
        // Nonbasic structurals take either bound; logicals sit at 0.
        let nonbasic: Vec<usize> = (0..total).filter(|c| !basic.contains(c)).collect();
        let nb_structural: Vec<usize> =
            nonbasic.iter().copied().filter(|&c| c < n).collect();
        let patterns = 1usize << nb_structural.len();
        for pattern in 0..patterns {
            let mut x = vec![0.0f64; total];
            for (bit, &j) in nb_structural.iter().enumerate() {
                x[j] = if pattern & (1 << bit) != 0 {
                    upper[j]
                } else {
                    lower[j]
                };
            }
            let mut b2 = rhs.clone();
            for &j in &nonbasic {
                let xv = x[j];
                if xv != 0.0 {
                    for r in 0..m {
                        b2[r] -= cols[j][r] * xv;
                    }
                }
            }
            let mut a = vec![vec![0.0f64; m]; m];
            for (k, &j) in basic.iter().enumerate() {
                for r in 0..m {
                    a[r][k] = cols[j][r];
                }
            }
            let Some(xb) = solve_dense(&mut a, &mut b2) else {
                continue;
            };
            let mut feasible = true;
            for (k, &j) in basic.iter().enumerate() {
                x[j] = xb[k];
                if xb[k] < lower[j] - tol || xb[k] > upper[j] + tol {
                    feasible = false;
                    break;
                }
            }
            if !feasible {
                continue;
            }
            let obj: f64 = (0..n).map(|j| objective[j] * x[j]).sum();
            best = Some(match best {
                Some(b) if b <= obj => b,
                _ => obj,
            });
        }
    };
    subsets(0, 0, total, &mut basis, &mut visit);
    best
}

pub struct RandomMilpSpec {
    pub num_continuous: usize,
    pub num_binaries: usize,
    pub num_rows: usize,
    pub seed: u64,
}

/// A random bounded MILP: boxed continuous variables plus binaries that
/// appear in rows and the objective.
pub fn random_milp(spec: &RandomMilpSpec) -> MilpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(0x9E37_79B9).wrapping_add(17));
    let mut lp = LinearProgram::new();
    let n = spec.num_continuous;
    for j in 0..n {
        let upper = 1.0 + (rng.random::<f64>() * 9.0).round();
        let cost = ((rng.random::<f64>() * 10.0 - 5.0) * 2.0).round() / 2.0;
        lp.add_var(format!("x{j}"), 0.0, upper, cost);
    }
    let mut binaries = Vec::new();
    for k in 0..spec.num_binaries {
        let cost = ((rng.random::<f64>() * 10.0 - 5.0) * 2.0).round() / 2.0;
        binaries.push(lp.add_var(format!("z{k}"), 0.0, 1.0, cost));
    }
    let total = n + spec.num_binaries;
    for r in 0..spec.num_rows {
        let nnz = 2 + (rng.random::<f64>() * 4.0) as usize;
        let mut coeffs = Vec::new();
        let mut used = vec![false; total];
        for _ in 0..nnz {
            let j = (rng.random::<f64>() * total as f64) as usize % total;
            if used[j] {
                continue;
            }
            used[j] = true;
            let c = ((rng.random::<f64>() * 12.0 - 6.0) * 2.0).round() / 2.0;
            if c != 0.0 {
                coeffs.push((j, c));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((r % total, 1.0));
        }
        let mass: f64 = coeffs.iter().map(|&(j, c)| c * lp.bounds[j].1 * 0.4).sum();
        let sense = if rng.random::<f64>() < 0.5 {
            Sense::Le
        } else {
            Sense::Ge
        };
        let rhs = mass + rng.random::<f64>() * 4.0 - 2.0;
        lp.add_row(format!("r{r}"), sense, rhs, &coeffs);
    }
    MilpProblem { lp, binary_vars: binaries }
}

/// Exhaustive oracle: every binary assignment is fixed and the
/// continuous rest solved as an LP; the best objective wins.
pub fn enumerate_milp(p: &MilpProblem, tol: &FeasTolerances) -> Option<f64> {
    let nb = p.binary_vars.len();
    let mut lp = p.lp.clone();
    let mut best: Option<f64> = None;
    for mask in 0u64..(1u64 << nb) {
        for (bit, &v) in p.binary_vars.iter().enumerate() {
            let val = if mask & (1 << bit) != 0 { 1.0 } else { 0.0 };
            lp.bounds[v] = (val, val);
        }
        let sol = solve_lp(&lp, tol).expect("oracle lp solve");
        if sol.status == SolveStatus::Optimal {
            best = Some(match best {
                Some(b) if b <= sol.objective_value => b,
                _ => sol.objective_value,
            });
        }
    }
    best
}

/// Asserts the point satisfies every row and bound of the program.
pub fn assert_point_feasible(lp: &LinearProgram, point: &[f64], tol: f64) {
    let violations = check_point(lp, point, tol);
    assert!(
        violations.is_empty(),
        "point violates {} rows, worst {} ({})",
        violations.len(),
        violations[0].violation,
        violations[0].name
    );
}
