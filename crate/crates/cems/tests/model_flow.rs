//! End-to-end checks of the model builders: build → solve → extract →
//! audit, on both a hand-sized instance and the bundled dataset.

use cems::domain::{
    BuildingConfig, BuildingKind, CommunityConfig, EssParams, ExogenousData, HvacZoneParams,
    PriceSchedule, PvParams, PvTruth, ScenarioParams, TimeGrid, DEFAULT_COMFORT_COEFFS,
    REFERENCE_IRRADIANCE,
};
use cems::io::bundled;
use cems::lpcore::{solve_lp, solve_milp, FeasTolerances, SolveStatus};
use cems::model::{
    add_comfort_cuts, audit_schedule, build_level1, build_level2, extract_schedule, AuditScope,
    Mode, VarKey, VarRole, DEFAULT_COMFORT_CUTS,
};
use cems::scenario::ScenarioSet;

fn tol() -> FeasTolerances {
    FeasTolerances::default()
}

/// One building, one zone, two 12 h steps, no demand, no PV. The zone
/// starts at the envelope-minimizing temperature with the outdoor
/// temperature pinned there, so holding still is optimal.
fn tiny_config(lambda_ffr: f64) -> (CommunityConfig, f64) {
    let zone = HvacZoneParams {
        heat_capacity: 1.0,
        thermal_resistance: 24.0,
        cop: 0.1,
        p_h_max_kw: 50.0,
        temp_min_c: 18.0,
        temp_max_c: 26.0,
        temp_init_c: 22.0, // placeholder, replaced below
        comfort_coeffs: DEFAULT_COMFORT_COEFFS,
    };
    // Envelope minimizer by dense scan (test-side oracle).
    let cuts = add_comfort_cuts(&zone, DEFAULT_COMFORT_CUTS).unwrap();
    let mut best_t = zone.temp_min_c;
    let mut best_v = f64::INFINITY;
    let mut t = zone.temp_min_c;
    while t <= zone.temp_max_c {
        let v = cuts.envelope(t);
        if v < best_v {
            best_v = v;
            best_t = t;
        }
        t += 0.0001;
    }

    let ess = EssParams {
        capacity_kwh: 1000.0,
        eta_ch: 0.9,
        eta_dis: 0.8,
        p_ch_max_kw: 250.0,
        p_dis_max_kw: 250.0,
        p_ch_min_kw: 0.0,
        p_dis_min_kw: 0.0,
        soc_min_frac: 0.2,
        soc_max_frac: 0.8,
        soc_boundary_frac: 0.5,
        e_min_kwh: 220.0,
        e_max_kwh: 780.0,
    };
    let mut zone = zone;
    zone.temp_init_c = best_t;
    let cfg = CommunityConfig {
        time: TimeGrid {
            step_hours: 12.0,
            horizon_steps: 2,
            rt_step_seconds: 2.0,
            smpc_horizon: 2,
        },
        buildings: vec![BuildingConfig {
            id: "solo".into(),
            kind: BuildingKind::Office,
            zones: vec![zone],
            ess,
            pv: PvParams {
                p_max_kw: 100.0,
                efficiency: 0.9,
                reference_irradiance: REFERENCE_IRRADIANCE,
            },
            demand_load: vec![0.0, 0.0],
            demand_ev: vec![0.0, 0.0],
        }],
        prices: PriceSchedule {
            lambda_import: vec![1.0, 1.0],
            lambda_export: vec![0.0, 0.0],
            lambda_comfort: 10.0,
            lambda_ffr,
        },
        exogenous: ExogenousData {
            t_out: vec![best_t, best_t],
            clear_sky_irr: vec![0.0, 0.0],
            reg_signal: vec![0.0; 2 * (12 * 3600 / 2)],
            pv_truth: PvTruth::Series(vec![0.0, 0.0]),
        },
        scenario: ScenarioParams::default(),
    };
    (cfg, best_v)
}

#[test]
fn idle_instance_costs_exactly_the_comfort_floor() {
    let (cfg, envelope_min) = tiny_config(0.0);
    let instance = build_level1(&cfg, &[0.0, 0.0], Mode::Cems, DEFAULT_COMFORT_CUTS).unwrap();
    let sol = solve_milp(&instance.problem, &tol(), 1e-6).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);

    let expected = cfg.prices.lambda_comfort * cfg.time.step_hours * 2.0 * envelope_min;
    assert!(
        (sol.objective_value - expected).abs() <= 1e-6 * (1.0 + expected.abs()),
        "objective {} vs comfort floor {expected}",
        sol.objective_value
    );

    let schedule = extract_schedule(&sol, &instance.vmap).unwrap();
    for t in 0..2 {
        assert!(schedule.require(&VarKey::new(VarRole::Charge, t).b(0)).abs() <= 1e-9);
        assert!(schedule.require(&VarKey::new(VarRole::Discharge, t).b(0)).abs() <= 1e-9);
    }
    for t in 0..=2 {
        let soc = schedule.require(&VarKey::new(VarRole::Soc, t).b(0));
        assert!((soc - 500.0).abs() <= 1e-9, "soc[{t}] = {soc}");
    }

    let scope = AuditScope {
        cfg: &cfg,
        mode: Mode::Cems,
        irradiance: &[vec![0.0, 0.0]],
        k_start: 0,
        k_end: 2,
        commitment: None,
        cut_count: DEFAULT_COMFORT_CUTS,
    };
    let violations = audit_schedule(&scope, &schedule, 1e-6);
    assert!(violations.is_empty(), "audit: {violations:?}");
}

#[test]
fn high_reserve_price_activates_ess_reserves_everywhere() {
    let (cfg, _) = tiny_config(1000.0);
    let instance = build_level1(&cfg, &[0.0, 0.0], Mode::Cems, DEFAULT_COMFORT_CUTS).unwrap();
    let sol = solve_milp(&instance.problem, &tol(), 1e-6).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let schedule = extract_schedule(&sol, &instance.vmap).unwrap();
    for t in 0..2 {
        let up = schedule.require(&VarKey::new(VarRole::EssUp, t).b(0));
        let dn = schedule.require(&VarKey::new(VarRole::EssDn, t).b(0));
        assert!(up + dn > 1.0, "step {t}: ess reserves {up} + {dn}");
    }
    // Cross-check two reserve rows by hand at t = 0: the SoC window and
    // the converter power limits cap what was committed.
    let ess = &cfg.buildings[0].ess;
    let soc0 = schedule.require(&VarKey::new(VarRole::Soc, 0).b(0));
    let up0 = schedule.require(&VarKey::new(VarRole::EssUp, 0).b(0));
    let dn0 = schedule.require(&VarKey::new(VarRole::EssDn, 0).b(0));
    assert!(soc0 + up0 <= ess.e_max_kwh + 1e-6);
    assert!(soc0 - dn0 >= ess.e_min_kwh - 1e-6);
    let ch0 = schedule.require(&VarKey::new(VarRole::Charge, 0).b(0));
    let dis0 = schedule.require(&VarKey::new(VarRole::Discharge, 0).b(0));
    let ch_up = schedule.require(&VarKey::new(VarRole::ChargeUp, 0).b(0));
    let ch_dn = schedule.require(&VarKey::new(VarRole::ChargeDn, 0).b(0));
    let dis_up = schedule.require(&VarKey::new(VarRole::DischargeUp, 0).b(0));
    let dis_dn = schedule.require(&VarKey::new(VarRole::DischargeDn, 0).b(0));
    assert!(dis0 + dis_up <= ess.p_dis_max_kw + 1e-6);
    assert!(ch0 + ch_dn <= ess.p_ch_max_kw + 1e-6);
    assert!(ch0 - ch_up >= -1e-6);
    assert!(dis0 - dis_dn >= -1e-6);

    let scope = AuditScope {
        cfg: &cfg,
        mode: Mode::Cems,
        irradiance: &[vec![0.0, 0.0]],
        k_start: 0,
        k_end: 2,
        commitment: None,
        cut_count: DEFAULT_COMFORT_CUTS,
    };
    assert!(audit_schedule(&scope, &schedule, 1e-6).is_empty());
}

#[test]
fn community_mode_never_costs_more_than_separate_buildings() {
    let cfg = bundled::campus3();
    let clear = cfg.exogenous.clear_sky_irr.clone();

    let cems = build_level1(&cfg, &clear, Mode::Cems, DEFAULT_COMFORT_CUTS).unwrap();
    let cems_sol = solve_milp(&cems.problem, &tol(), 1e-6).unwrap();
    assert_eq!(cems_sol.status, SolveStatus::Optimal);
    let cems_schedule = extract_schedule(&cems_sol, &cems.vmap).unwrap();
    let scope = AuditScope {
        cfg: &cfg,
        mode: Mode::Cems,
        irradiance: std::slice::from_ref(&clear),
        k_start: 0,
        k_end: cfg.time.horizon_steps,
        commitment: None,
        cut_count: DEFAULT_COMFORT_CUTS,
    };
    let violations = audit_schedule(&scope, &cems_schedule, 1e-6);
    assert!(violations.is_empty(), "cems audit: {:?}", &violations[..violations.len().min(5)]);

    let mut bems_total = 0.0;
    for b in 0..cfg.buildings.len() {
        let inst = build_level1(&cfg, &clear, Mode::Bems(b), DEFAULT_COMFORT_CUTS).unwrap();
        let sol = solve_milp(&inst.problem, &tol(), 1e-6).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "bems({b})");
        let schedule = extract_schedule(&sol, &inst.vmap).unwrap();
        let scope = AuditScope {
            cfg: &cfg,
            mode: Mode::Bems(b),
            irradiance: std::slice::from_ref(&clear),
            k_start: 0,
            k_end: cfg.time.horizon_steps,
            commitment: None,
            cut_count: DEFAULT_COMFORT_CUTS,
        };
        let violations = audit_schedule(&scope, &schedule, 1e-6);
        assert!(violations.is_empty(), "bems({b}) audit: {:?}", &violations[..violations.len().min(5)]);
        bems_total += sol.objective_value;
    }
    assert!(
        cems_sol.objective_value <= bems_total + 1e-6,
        "cems {} vs bems sum {bems_total}",
        cems_sol.objective_value
    );
}

#[test]
fn single_scenario_window_matches_level1_restriction() {
    let cfg = bundled::campus3();
    let clear = cfg.exogenous.clear_sky_irr.clone();
    let horizon = cfg.time.horizon_steps;

    let l1 = build_level1(&cfg, &clear, Mode::Cems, DEFAULT_COMFORT_CUTS).unwrap();
    let l1_sol = solve_milp(&l1.problem, &tol(), 1e-6).unwrap();
    assert_eq!(l1_sol.status, SolveStatus::Optimal);
    let l1_schedule = extract_schedule(&l1_sol, &l1.vmap).unwrap();

    // Commitment from the Level-1 schedule.
    let mut commitment = cems::model::FfrCommitment::zeros(horizon, &[1, 1, 1]);
    for t in 0..horizon {
        for b in 0..3 {
            commitment.ess_up[t][b] = l1_schedule.require(&VarKey::new(VarRole::EssUp, t).b(b));
            commitment.ess_dn[t][b] = l1_schedule.require(&VarKey::new(VarRole::EssDn, t).b(b));
            commitment.hvac_up[t][b][0] =
                l1_schedule.require(&VarKey::new(VarRole::HvacUp, t).b(b).i(0));
            commitment.hvac_dn[t][b][0] =
                l1_schedule.require(&VarKey::new(VarRole::HvacDn, t).b(b).i(0));
        }
    }

    let scenarios = ScenarioSet {
        scenarios: vec![clear.clone()],
        weights: vec![1.0],
        anchor_step: 0,
        clear_sky: clear.clone(),
        step_hours: 1.0,
    };
    let soc_now: Vec<f64> = cfg.buildings.iter().map(|b| b.ess.soc_boundary_kwh()).collect();
    let temp_now: Vec<Vec<f64>> = cfg
        .buildings
        .iter()
        .map(|b| b.zones.iter().map(|z| z.temp_init_c).collect())
        .collect();

    let l2 = build_level2(
        &cfg,
        &scenarios,
        0,
        horizon,
        &commitment,
        &soc_now,
        &temp_now,
        Mode::Cems,
        DEFAULT_COMFORT_CUTS,
    )
    .unwrap();
    let l2_sol = solve_milp(&l2.problem, &tol(), 1e-6).unwrap();
    assert_eq!(l2_sol.status, SolveStatus::Optimal);
    let l2_schedule = extract_schedule(&l2_sol, &l2.vmap).unwrap();

    // No slack should be active with a consistent commitment.
    for (key, v) in &l2_schedule.values {
        if matches!(key.role, VarRole::SlackDeficit | VarRole::SlackSurplus) {
            assert!(*v <= 1e-7, "slack {key} = {v}");
        }
    }

    // Level 1 with the Level-2 binaries pinned has the same optimum.
    let mut restricted = l1.problem.lp.clone();
    for &z in &l1.problem.binary_vars {
        let key = l1.vmap.key(z);
        let val = l2_schedule.require(&key);
        restricted.bounds[z] = (val, val);
    }
    let restricted_sol = solve_lp(&restricted, &tol()).unwrap();
    assert_eq!(restricted_sol.status, SolveStatus::Optimal);
    assert!(
        (l2_sol.objective_value - restricted_sol.objective_value).abs() <= 1e-5
            * (1.0 + restricted_sol.objective_value.abs()),
        "window objective {} vs restricted day-ahead {}",
        l2_sol.objective_value,
        restricted_sol.objective_value
    );

    let scope = AuditScope {
        cfg: &cfg,
        mode: Mode::Cems,
        irradiance: std::slice::from_ref(&clear),
        k_start: 0,
        k_end: horizon,
        commitment: Some(&commitment),
        cut_count: DEFAULT_COMFORT_CUTS,
    };
    let violations = audit_schedule(&scope, &l2_schedule, 1e-6);
    assert!(violations.is_empty(), "level-2 audit: {:?}", &violations[..violations.len().min(5)]);
}

#[test]
fn zero_pv_scenario_forces_grid_or_storage_balance() {
    let cfg = bundled::campus3();
    let horizon = cfg.time.horizon_steps;
    let zeros = vec![0.0; horizon];
    let scenarios = ScenarioSet {
        scenarios: vec![zeros.clone()],
        weights: vec![1.0],
        anchor_step: 0,
        clear_sky: cfg.exogenous.clear_sky_irr.clone(),
        step_hours: 1.0,
    };
    let commitment = cems::model::FfrCommitment::zeros(horizon, &[1, 1, 1]);
    let soc_now: Vec<f64> = cfg.buildings.iter().map(|b| b.ess.soc_boundary_kwh()).collect();
    let temp_now: Vec<Vec<f64>> = cfg
        .buildings
        .iter()
        .map(|b| b.zones.iter().map(|z| z.temp_init_c).collect())
        .collect();
    let l2 = build_level2(
        &cfg,
        &scenarios,
        0,
        horizon,
        &commitment,
        &soc_now,
        &temp_now,
        Mode::Cems,
        DEFAULT_COMFORT_CUTS,
    )
    .unwrap();
    let sol = solve_milp(&l2.problem, &tol(), 1e-6).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let schedule = extract_schedule(&sol, &l2.vmap).unwrap();
    let scope = AuditScope {
        cfg: &cfg,
        mode: Mode::Cems,
        irradiance: std::slice::from_ref(&zeros),
        k_start: 0,
        k_end: horizon,
        commitment: Some(&commitment),
        cut_count: DEFAULT_COMFORT_CUTS,
    };
    assert!(audit_schedule(&scope, &schedule, 1e-6).is_empty());
}

#[test]
fn shared_first_stage_under_diverging_scenarios() {
    // Two equally weighted scenarios that differ only late in the
    // window: device schedules are scenario-shared by construction, so
    // the first-step decisions cannot differ.
    let cfg = bundled::campus3();
    let horizon = cfg.time.horizon_steps;
    let clear = cfg.exogenous.clear_sky_irr.clone();
    let mut low = clear.clone();
    for t in 14..horizon {
        low[t] *= 0.5;
    }
    let scenarios = ScenarioSet {
        scenarios: vec![clear.clone(), low],
        weights: vec![0.5, 0.5],
        anchor_step: 0,
        clear_sky: clear.clone(),
        step_hours: 1.0,
    };
    let commitment = cems::model::FfrCommitment::zeros(horizon, &[1, 1, 1]);
    let soc_now: Vec<f64> = cfg.buildings.iter().map(|b| b.ess.soc_boundary_kwh()).collect();
    let temp_now: Vec<Vec<f64>> = cfg
        .buildings
        .iter()
        .map(|b| b.zones.iter().map(|z| z.temp_init_c).collect())
        .collect();
    let l2 = build_level2(
        &cfg,
        &scenarios,
        0,
        6,
        &commitment,
        &soc_now,
        &temp_now,
        Mode::Cems,
        DEFAULT_COMFORT_CUTS,
    )
    .unwrap();
    // Device-level roles carry no scenario index in the variable map.
    for (key, _) in l2.vmap.iter() {
        match key.role {
            VarRole::Charge
            | VarRole::Discharge
            | VarRole::Hvac
            | VarRole::Soc
            | VarRole::IndoorTemp
            | VarRole::ChargeOn
            | VarRole::DischargeOn => {
                assert!(key.s.is_none(), "{key} should be scenario-shared");
            }
            VarRole::Import | VarRole::Export | VarRole::GridImport | VarRole::GridExport => {
                assert!(key.s.is_some(), "{key} should be scenario-indexed");
            }
            _ => {}
        }
    }
    let sol = solve_milp(&l2.problem, &tol(), 1e-6).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
}
