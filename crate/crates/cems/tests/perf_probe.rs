//! Manual timing probe; run with `--ignored --nocapture`.

use cems::io::bundled;
use cems::lpcore::{solve_lp, solve_milp, FeasTolerances, SolveStatus};
use cems::model::{build_level1, Mode, DEFAULT_COMFORT_CUTS};

#[test]
#[ignore]
fn probe_level1_timing() {
    let cfg = bundled::campus3();
    let clear = cfg.exogenous.clear_sky_irr.clone();
    let inst = build_level1(&cfg, &clear, Mode::Cems, DEFAULT_COMFORT_CUTS).unwrap();
    println!(
        "level1 size: {} vars, {} rows, {} binaries",
        inst.problem.lp.num_vars,
        inst.problem.lp.rows.len(),
        inst.problem.binary_vars.len()
    );
    let t0 = std::time::Instant::now();
    let relax = solve_lp(&inst.problem.lp, &FeasTolerances::default()).unwrap();
    println!(
        "relaxation: {:?} obj {} in {} iters, {:.2?}",
        relax.status,
        relax.objective_value,
        relax.iterations,
        t0.elapsed()
    );
    if relax.status != SolveStatus::Optimal {
        return;
    }
    let t1 = std::time::Instant::now();
    let milp = solve_milp(&inst.problem, &FeasTolerances::default(), 1e-6).unwrap();
    println!(
        "milp: {:?} obj {} gap {} total iters {} in {:.2?}",
        milp.status,
        milp.objective_value,
        milp.mip_gap,
        milp.iterations,
        t1.elapsed()
    );
}
