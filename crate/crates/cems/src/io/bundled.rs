//! The bundled synthetic dataset: a three-building campus with office,
//! research, and residential load shapes, one zone per building, 1 MWh
//! of storage each, 10 MW of community PV split 4/4/2, a day-peaked
//! time-of-use tariff, and a fast, roughly energy-neutral regulation
//! test signal (triangle plus seeded noise).
//!
//! Everything is a pure function of the step index, so the dataset is
//! identical on every machine and every run.

use crate::domain::{
    BuildingConfig, BuildingKind, CommunityConfig, EssParams, ExogenousData, HvacZoneParams,
    PriceSchedule, PvParams, PvTruth, ScenarioParams, TimeGrid, REFERENCE_IRRADIANCE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier accepted by the CLI in place of a config path.
pub const CAMPUS3_ID: &str = "bundled:campus3";

const REG_NOISE_SEED: u64 = 0x2424;
const REG_TRIANGLE_PERIOD_S: f64 = 600.0;
const REG_NOISE_AMPLITUDE: f64 = 0.05;

fn ess_1mwh() -> EssParams {
    EssParams {
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
        // Keep a small margin inside the corridor so a full hour of
        // deployment drift cannot push the plant outside 20–80%.
        e_min_kwh: 220.0,
        e_max_kwh: 780.0,
    }
}

fn zone(kind: BuildingKind) -> HvacZoneParams {
    let (thermal_resistance, cop, p_h_max_kw) = match kind {
        BuildingKind::Office => (4.0, 0.10, 100.0),
        BuildingKind::Research => (5.0, 0.065, 150.0),
        BuildingKind::Residential => (3.2, 0.20, 50.0),
    };
    HvacZoneParams {
        heat_capacity: 1.0,
        thermal_resistance,
        cop,
        p_h_max_kw,
        temp_min_c: 18.0,
        temp_max_c: 26.0,
        temp_init_c: 24.5,
        comfort_coeffs: crate::domain::DEFAULT_COMFORT_COEFFS,
    }
}

fn pv(p_max_kw: f64) -> PvParams {
    PvParams {
        p_max_kw,
        efficiency: 0.9,
        reference_irradiance: REFERENCE_IRRADIANCE,
    }
}

/// Smooth bump centered at `mid` with half-width `width`, in [0, 1].
fn bump(t: f64, mid: f64, width: f64) -> f64 {
    let x = (t - mid) / width;
    if x.abs() >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * x).cos())
    }
}

fn office_load(t: usize) -> f64 {
    200.0 + 420.0 * bump(t as f64 + 0.5, 13.0, 7.0)
}

fn research_load(t: usize) -> f64 {
    320.0 + 480.0 * bump(t as f64 + 0.5, 13.5, 8.0)
}

fn residential_load(t: usize) -> f64 {
    110.0 + 160.0 * bump(t as f64 + 0.5, 7.0, 3.0) + 300.0 * bump(t as f64 + 0.5, 20.5, 4.5)
}

fn ev_load(kind: BuildingKind, t: usize) -> f64 {
    match kind {
        // Workplace charging during the day.
        BuildingKind::Office => 60.0 * bump(t as f64 + 0.5, 11.0, 5.0),
        BuildingKind::Research => 40.0 * bump(t as f64 + 0.5, 12.0, 5.0),
        // Home charging overnight.
        BuildingKind::Residential => {
            45.0 * bump(t as f64 + 0.5, 1.5, 3.0) + 45.0 * bump(t as f64 + 0.5, 22.5, 3.0)
        }
    }
}

fn clear_sky(t: usize) -> f64 {
    let h = t as f64 + 0.5;
    if !(6.0..=19.5).contains(&h) {
        return 0.0;
    }
    950.0 * bump(h, 12.75, 6.9)
}

fn t_out(t: usize) -> f64 {
    22.0 + 8.5 * bump(t as f64 + 0.5, 14.5, 9.0)
}

fn lambda_import(t: usize) -> f64 {
    match t {
        23 | 0..=8 => 0.08,
        11..=17 => 0.18,
        _ => 0.12,
    }
}

/// The plant's realized irradiance: mostly clear with a pronounced
/// afternoon dip, so re-scheduling has real work to do.
fn pv_truth(t: usize) -> f64 {
    clear_sky(t) * (1.0 - 0.3 * bump(t as f64 + 0.5, 15.0, 2.5))
}

/// Regulation test signal at one substep: a ±1 triangle with a 10 min
/// period plus small seeded noise, clipped to [−1, 1]. Zero mean over
/// every period, so hourly deployment is close to energy-neutral.
fn reg_triangle(time_s: f64) -> f64 {
    let phase = (time_s / REG_TRIANGLE_PERIOD_S).fract();
    if phase < 0.25 {
        4.0 * phase
    } else if phase < 0.75 {
        2.0 - 4.0 * phase
    } else {
        4.0 * phase - 4.0
    }
}

fn reg_signal(time: &TimeGrid) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(REG_NOISE_SEED);
    let total = time.total_substeps();
    let mut out = Vec::with_capacity(total);
    for k in 0..total {
        let t_s = k as f64 * time.rt_step_seconds;
        let noise = REG_NOISE_AMPLITUDE * (2.0 * rng.random::<f64>() - 1.0);
        out.push((reg_triangle(t_s) + noise).clamp(-1.0, 1.0));
    }
    out
}

/// Builds the bundled three-building community.
pub fn campus3() -> CommunityConfig {
    let time = TimeGrid::default();
    let horizon = time.horizon_steps;

    let buildings = vec![
        BuildingConfig {
            id: "office".into(),
            kind: BuildingKind::Office,
            zones: vec![zone(BuildingKind::Office)],
            ess: ess_1mwh(),
            pv: pv(4000.0),
            demand_load: (0..horizon).map(office_load).collect(),
            demand_ev: (0..horizon).map(|t| ev_load(BuildingKind::Office, t)).collect(),
        },
        BuildingConfig {
            id: "research".into(),
            kind: BuildingKind::Research,
            zones: vec![zone(BuildingKind::Research)],
            ess: ess_1mwh(),
            pv: pv(4000.0),
            demand_load: (0..horizon).map(research_load).collect(),
            demand_ev: (0..horizon)
                .map(|t| ev_load(BuildingKind::Research, t))
                .collect(),
        },
        BuildingConfig {
            id: "residential".into(),
            kind: BuildingKind::Residential,
            zones: vec![zone(BuildingKind::Residential)],
            ess: ess_1mwh(),
            pv: pv(2000.0),
            demand_load: (0..horizon).map(residential_load).collect(),
            demand_ev: (0..horizon)
                .map(|t| ev_load(BuildingKind::Residential, t))
                .collect(),
        },
    ];

    let prices = PriceSchedule {
        lambda_import: (0..horizon).map(lambda_import).collect(),
        lambda_export: vec![0.05; horizon],
        lambda_comfort: 250.0,
        lambda_ffr: 0.06,
    };

    let exogenous = ExogenousData {
        t_out: (0..horizon).map(t_out).collect(),
        clear_sky_irr: (0..horizon).map(clear_sky).collect(),
        reg_signal: reg_signal(&time),
        pv_truth: PvTruth::Series((0..horizon).map(pv_truth).collect()),
    };

    CommunityConfig {
        time,
        buildings,
        prices,
        exogenous,
        scenario: ScenarioParams::default(),
    }
}
