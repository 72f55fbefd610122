//! Domain types shared across the whole artifact, plus configuration
//! validation against physical and model invariants.
//!
//! Everything here is immutable after construction and safe to share
//! across concurrent solver or simulation tasks.

use serde::{Deserialize, Serialize};

/// Reference irradiance for rated PV output, in W/m².
pub const REFERENCE_IRRADIANCE: f64 = 1000.0;

/// Comfort quadratic coefficients `(a, b, c)` used when a zone does not
/// override them: discomfort = a·T² + b·T + c.
pub const DEFAULT_COMFORT_COEFFS: (f64, f64, f64) = (0.01087, -0.5541, 6.8587);

/// Time discretization for all three control levels.
///
/// Level 1 and Level 2 share the hourly-scale grid (`step_hours` ×
/// `horizon_steps` = 24 h); Level 3 runs on `rt_step_seconds` substeps
/// inside each scheduling step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeGrid {
    pub step_hours: f64,
    pub horizon_steps: usize,
    pub rt_step_seconds: f64,
    /// Rolling-window length for the Level-2 re-scheduling problem.
    pub smpc_horizon: usize,
}

impl TimeGrid {
    /// Number of real-time substeps in one scheduling step.
    pub fn substeps_per_step(&self) -> usize {
        (self.step_hours * 3600.0 / self.rt_step_seconds).round() as usize
    }

    /// Total real-time substeps over the whole day.
    pub fn total_substeps(&self) -> usize {
        self.substeps_per_step() * self.horizon_steps
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            step_hours: 1.0,
            horizon_steps: 24,
            rt_step_seconds: 2.0,
            smpc_horizon: 24,
        }
    }
}

/// PV array parameters; output follows the maximum-power-point rule
/// `p = p_max · (G / 1000) · efficiency`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PvParams {
    pub p_max_kw: f64,
    pub efficiency: f64,
    #[serde(default = "default_reference_irradiance")]
    pub reference_irradiance: f64,
}

fn default_reference_irradiance() -> f64 {
    REFERENCE_IRRADIANCE
}

/// First-order (RC) thermal zone with a cooling HVAC unit and a
/// quadratic discomfort curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HvacZoneParams {
    /// Lumped heat capacity, kWh/°C.
    pub heat_capacity: f64,
    /// Lumped thermal resistance, °C/kW.
    pub thermal_resistance: f64,
    /// HVAC conversion factor applied to electrical power in the zone
    /// temperature recursion.
    pub cop: f64,
    /// Maximum HVAC electrical power, kW.
    pub p_h_max_kw: f64,
    pub temp_min_c: f64,
    pub temp_max_c: f64,
    /// Indoor temperature at the start of the day, °C.
    pub temp_init_c: f64,
    /// `(a, b, c)` of discomfort = a·T² + b·T + c.
    #[serde(default = "default_comfort_coeffs")]
    pub comfort_coeffs: (f64, f64, f64),
}

fn default_comfort_coeffs() -> (f64, f64, f64) {
    DEFAULT_COMFORT_COEFFS
}

impl HvacZoneParams {
    /// One-step temperature retention factor `1 − Δt/(C·R)`.
    pub fn retention(&self, step_hours: f64) -> f64 {
        1.0 - step_hours / (self.heat_capacity * self.thermal_resistance)
    }
}

/// Energy storage parameters. The operating corridor is
/// `[soc_min_frac, soc_max_frac]` of capacity; `e_min_kwh`/`e_max_kwh`
/// are the (possibly tighter) limits used by the reserve-headroom rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EssParams {
    pub capacity_kwh: f64,
    pub eta_ch: f64,
    pub eta_dis: f64,
    pub p_ch_max_kw: f64,
    pub p_dis_max_kw: f64,
    #[serde(default)]
    pub p_ch_min_kw: f64,
    #[serde(default)]
    pub p_dis_min_kw: f64,
    pub soc_min_frac: f64,
    pub soc_max_frac: f64,
    pub soc_boundary_frac: f64,
    pub e_min_kwh: f64,
    pub e_max_kwh: f64,
}

impl EssParams {
    pub fn soc_lower_kwh(&self) -> f64 {
        self.soc_min_frac * self.capacity_kwh
    }

    pub fn soc_upper_kwh(&self) -> f64 {
        self.soc_max_frac * self.capacity_kwh
    }

    pub fn soc_boundary_kwh(&self) -> f64 {
        self.soc_boundary_frac * self.capacity_kwh
    }
}

/// Building archetype; affects only the bundled dataset shapes, not the
/// model structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildingKind {
    Office,
    Research,
    Residential,
}

impl std::fmt::Display for BuildingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BuildingKind::Office => write!(f, "office"),
            BuildingKind::Research => write!(f, "research"),
            BuildingKind::Residential => write!(f, "residential"),
        }
    }
}

/// One building: zones, storage, PV, and its exogenous demand series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildingConfig {
    pub id: String,
    pub kind: BuildingKind,
    pub zones: Vec<HvacZoneParams>,
    pub ess: EssParams,
    pub pv: PvParams,
    /// Uncontrollable building load per step, kW.
    pub demand_load: Vec<f64>,
    /// EV charging load per step, kW (exogenous).
    pub demand_ev: Vec<f64>,
}

/// Time-of-use tariff and the two scalar prices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriceSchedule {
    /// Import price per kWh, one entry per step.
    pub lambda_import: Vec<f64>,
    /// Export price per kWh, one entry per step.
    pub lambda_export: Vec<f64>,
    /// Price per discomfort unit.
    pub lambda_comfort: f64,
    /// Reserve capacity price per kW (per hour of commitment).
    pub lambda_ffr: f64,
}

/// How the plant's realized irradiance is chosen for a simulation run.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PvTruth {
    /// Replay a fixed series (one value per step, W/m²).
    Series(Vec<f64>),
    /// Draw a fresh trajectory from the scenario model.
    #[default]
    Draw,
}

/// Exogenous drivers: weather and the regulation signal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExogenousData {
    /// Outdoor temperature per step, °C.
    pub t_out: Vec<f64>,
    /// Clear-sky irradiance per step, W/m²; the scenario generator's
    /// envelope.
    pub clear_sky_irr: Vec<f64>,
    /// Regulation signal in [−1, 1] at real-time resolution.
    pub reg_signal: Vec<f64>,
    /// Realized irradiance used by the plant.
    #[serde(default)]
    pub pv_truth: PvTruth,
}

/// Scenario-model knobs; kept with the exogenous data because they
/// describe the same uncertainty source.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Per-step deviation std as a fraction of clear-sky.
    pub marginal_std: f64,
    /// Temporal correlation scale in hours.
    pub corr_length_hours: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            marginal_std: 0.15,
            corr_length_hours: 2.0,
        }
    }
}

/// The full static description of one community for one day.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommunityConfig {
    pub time: TimeGrid,
    pub buildings: Vec<BuildingConfig>,
    pub prices: PriceSchedule,
    pub exogenous: ExogenousData,
    #[serde(default)]
    pub scenario: ScenarioParams,
}

/// A single validation finding: where and what.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Path-like locator, e.g. `buildings[0].zones[1].temp_min_c`.
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// PV output at the maximum power point, kW.
///
/// Linear in irradiance: `p_max · (G / 1000) · efficiency`.
pub fn pv_output(pv: &PvParams, irradiance_wm2: f64) -> Result<f64, Violation> {
    if irradiance_wm2 < 0.0 {
        return Err(Violation::new(
            "irradiance",
            format!("negative irradiance {irradiance_wm2}"),
        ));
    }
    Ok(pv.p_max_kw * (irradiance_wm2 / pv.reference_irradiance) * pv.efficiency)
}

/// Instantaneous discomfort at an indoor temperature, from the zone's
/// quadratic curve.
pub fn comfort_sigma(coeffs: (f64, f64, f64), t_in_c: f64) -> f64 {
    let (a, b, c) = coeffs;
    a * t_in_c * t_in_c + b * t_in_c + c
}

/// Checks every invariant of a parsed configuration.
///
/// Violations are data, not failures: an empty list certifies the config
/// admits a well-posed optimization. The check is side-effect free and
/// idempotent.
pub fn validate_config(cfg: &CommunityConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let t = &cfg.time;

    if (t.step_hours * t.horizon_steps as f64 - 24.0).abs() > 1e-9 {
        out.push(Violation::new(
            "time",
            format!(
                "step_hours × horizon_steps must be 24 h exactly, got {} × {}",
                t.step_hours, t.horizon_steps
            ),
        ));
    }
    if t.step_hours <= 0.0 || t.horizon_steps == 0 {
        out.push(Violation::new("time", "step_hours and horizon_steps must be positive"));
    }
    if t.rt_step_seconds <= 0.0 {
        out.push(Violation::new("time.rt_step_seconds", "must be positive"));
    } else {
        let per_step = t.step_hours * 3600.0 / t.rt_step_seconds;
        if (per_step - per_step.round()).abs() > 1e-9 {
            out.push(Violation::new(
                "time.rt_step_seconds",
                format!(
                    "must divide one step ({} s) evenly, got {} s",
                    t.step_hours * 3600.0,
                    t.rt_step_seconds
                ),
            ));
        }
    }
    if t.smpc_horizon < 1 || t.smpc_horizon > t.horizon_steps {
        out.push(Violation::new(
            "time.smpc_horizon",
            format!(
                "must be in [1, {}], got {}",
                t.horizon_steps, t.smpc_horizon
            ),
        ));
    }

    if cfg.buildings.is_empty() {
        out.push(Violation::new("buildings", "at least one building is required"));
    }
    for (bi, b) in cfg.buildings.iter().enumerate() {
        let bp = format!("buildings[{bi}]");
        if b.zones.is_empty() {
            out.push(Violation::new(format!("{bp}.zones"), "at least one zone is required"));
        }
        for (zi, z) in b.zones.iter().enumerate() {
            let zp = format!("{bp}.zones[{zi}]");
            let cr = z.heat_capacity * z.thermal_resistance;
            if cr <= t.step_hours {
                out.push(Violation::new(
                    format!("{zp}.heat_capacity"),
                    format!(
                        "C·R = {cr} h must exceed the step length {} h (retention factor must stay in (0,1))",
                        t.step_hours
                    ),
                ));
            }
            if z.temp_min_c >= z.temp_max_c {
                out.push(Violation::new(
                    format!("{zp}.temp_min_c"),
                    format!(
                        "temperature band is degenerate: [{}, {}]",
                        z.temp_min_c, z.temp_max_c
                    ),
                ));
            }
            if z.temp_init_c < z.temp_min_c || z.temp_init_c > z.temp_max_c {
                out.push(Violation::new(
                    format!("{zp}.temp_init_c"),
                    format!(
                        "initial temperature {} outside [{}, {}]",
                        z.temp_init_c, z.temp_min_c, z.temp_max_c
                    ),
                ));
            }
            if z.comfort_coeffs.0 <= 0.0 {
                out.push(Violation::new(
                    format!("{zp}.comfort_coeffs"),
                    "leading coefficient must be positive (convex discomfort)",
                ));
            }
            if z.p_h_max_kw <= 0.0 {
                out.push(Violation::new(format!("{zp}.p_h_max_kw"), "must be positive"));
            }
            if z.cop <= 0.0 {
                out.push(Violation::new(format!("{zp}.cop"), "must be positive"));
            }
        }

        let e = &b.ess;
        let ep = format!("{bp}.ess");
        if e.capacity_kwh <= 0.0 {
            out.push(Violation::new(format!("{ep}.capacity_kwh"), "must be positive"));
        }
        if !(e.eta_ch > 0.0 && e.eta_ch <= 1.0) {
            out.push(Violation::new(
                format!("{ep}.eta_ch"),
                format!("must be in (0, 1], got {}", e.eta_ch),
            ));
        }
        if !(e.eta_dis > 0.0 && e.eta_dis <= 1.0) {
            out.push(Violation::new(
                format!("{ep}.eta_dis"),
                format!("must be in (0, 1], got {}", e.eta_dis),
            ));
        }
        if !(0.0 <= e.soc_min_frac
            && e.soc_min_frac < e.soc_boundary_frac
            && e.soc_boundary_frac < e.soc_max_frac
            && e.soc_max_frac <= 1.0)
        {
            out.push(Violation::new(
                format!("{ep}.soc_min_frac"),
                format!(
                    "need 0 ≤ min < boundary < max ≤ 1, got {} / {} / {}",
                    e.soc_min_frac, e.soc_boundary_frac, e.soc_max_frac
                ),
            ));
        }
        if e.e_min_kwh < e.soc_lower_kwh() - 1e-9 {
            out.push(Violation::new(
                format!("{ep}.e_min_kwh"),
                format!(
                    "reserve floor {} below the storage corridor floor {}",
                    e.e_min_kwh,
                    e.soc_lower_kwh()
                ),
            ));
        }
        if e.e_max_kwh > e.soc_upper_kwh() + 1e-9 {
            out.push(Violation::new(
                format!("{ep}.e_max_kwh"),
                format!(
                    "reserve ceiling {} above the storage corridor ceiling {}",
                    e.e_max_kwh,
                    e.soc_upper_kwh()
                ),
            ));
        }
        if e.p_ch_max_kw <= 0.0 || e.p_dis_max_kw <= 0.0 {
            out.push(Violation::new(format!("{ep}.p_ch_max_kw"), "power limits must be positive"));
        }
        if e.p_ch_min_kw < 0.0 || e.p_dis_min_kw < 0.0 {
            out.push(Violation::new(format!("{ep}.p_ch_min_kw"), "minimum powers must be ≥ 0"));
        }

        let pv = &b.pv;
        if pv.p_max_kw <= 0.0 {
            out.push(Violation::new(format!("{bp}.pv.p_max_kw"), "must be positive"));
        }
        if !(pv.efficiency > 0.0 && pv.efficiency <= 1.0) {
            out.push(Violation::new(
                format!("{bp}.pv.efficiency"),
                format!("must be in (0, 1], got {}", pv.efficiency),
            ));
        }
        if (pv.reference_irradiance - REFERENCE_IRRADIANCE).abs() > 1e-9 {
            out.push(Violation::new(
                format!("{bp}.pv.reference_irradiance"),
                format!("fixed at {REFERENCE_IRRADIANCE} W/m²"),
            ));
        }

        for (name, series) in [("demand_load", &b.demand_load), ("demand_ev", &b.demand_ev)] {
            if series.len() != t.horizon_steps {
                out.push(Violation::new(
                    format!("{bp}.{name}"),
                    format!("length {} ≠ horizon {}", series.len(), t.horizon_steps),
                ));
            }
            if let Some(idx) = series.iter().position(|v| *v < 0.0) {
                out.push(Violation::new(
                    format!("{bp}.{name}[{idx}]"),
                    format!("demand must be ≥ 0, got {}", series[idx]),
                ));
            }
        }
    }

    let p = &cfg.prices;
    for (name, series) in [("lambda_import", &p.lambda_import), ("lambda_export", &p.lambda_export)] {
        if series.len() != t.horizon_steps {
            out.push(Violation::new(
                format!("prices.{name}"),
                format!("length {} ≠ horizon {}", series.len(), t.horizon_steps),
            ));
        }
        if let Some(idx) = series.iter().position(|v| *v < 0.0) {
            out.push(Violation::new(
                format!("prices.{name}[{idx}]"),
                "prices must be ≥ 0",
            ));
        }
    }
    for i in 0..p.lambda_import.len().min(p.lambda_export.len()) {
        if p.lambda_export[i] > p.lambda_import[i] + 1e-12 {
            out.push(Violation::new(
                format!("prices.lambda_export[{i}]"),
                format!(
                    "export price {} exceeds import price {} (degenerate arbitrage)",
                    p.lambda_export[i], p.lambda_import[i]
                ),
            ));
        }
    }
    if p.lambda_comfort < 0.0 {
        out.push(Violation::new("prices.lambda_comfort", "must be ≥ 0"));
    }
    if p.lambda_ffr < 0.0 {
        out.push(Violation::new("prices.lambda_ffr", "must be ≥ 0"));
    }

    let x = &cfg.exogenous;
    if x.t_out.len() != t.horizon_steps {
        out.push(Violation::new(
            "exogenous.t_out",
            format!("length {} ≠ horizon {}", x.t_out.len(), t.horizon_steps),
        ));
    }
    if x.clear_sky_irr.len() != t.horizon_steps {
        out.push(Violation::new(
            "exogenous.clear_sky_irr",
            format!("length {} ≠ horizon {}", x.clear_sky_irr.len(), t.horizon_steps),
        ));
    }
    if let Some(idx) = x.clear_sky_irr.iter().position(|v| *v < 0.0) {
        out.push(Violation::new(
            format!("exogenous.clear_sky_irr[{idx}]"),
            "irradiance must be ≥ 0",
        ));
    }
    if t.rt_step_seconds > 0.0 && x.reg_signal.len() != t.total_substeps() {
        out.push(Violation::new(
            "exogenous.reg_signal",
            format!(
                "length {} ≠ total substeps {}",
                x.reg_signal.len(),
                t.total_substeps()
            ),
        ));
    }
    if let Some(idx) = x.reg_signal.iter().position(|v| v.abs() > 1.0 + 1e-12) {
        out.push(Violation::new(
            format!("exogenous.reg_signal[{idx}]"),
            format!("regulation values must lie in [−1, 1], got {}", x.reg_signal[idx]),
        ));
    }
    if let PvTruth::Series(s) = &x.pv_truth {
        if s.len() != t.horizon_steps {
            out.push(Violation::new(
                "exogenous.pv_truth",
                format!("length {} ≠ horizon {}", s.len(), t.horizon_steps),
            ));
        }
        if let Some(idx) = s.iter().position(|v| *v < 0.0) {
            out.push(Violation::new(
                format!("exogenous.pv_truth[{idx}]"),
                "irradiance must be ≥ 0",
            ));
        }
    }
    if cfg.scenario.marginal_std < 0.0 {
        out.push(Violation::new("scenario.marginal_std", "must be ≥ 0"));
    }
    if cfg.scenario.corr_length_hours <= 0.0 {
        out.push(Violation::new("scenario.corr_length_hours", "must be positive"));
    }

    out
}
