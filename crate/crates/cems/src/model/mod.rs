//! Translation of the community formulation into solver instances:
//! variable-index bookkeeping, the comfort-quadratic linearization, and
//! builders for the day-ahead allocation problem (Level 1) and the
//! rolling-window stochastic re-scheduling problem (Level 2).

mod audit;
mod build;
mod extract;

pub use audit::{audit_schedule, AuditScope};
pub use build::{build_level1, build_level2, ModelInstance};
pub use extract::{extract_schedule, Schedule};

use crate::domain::{HvacZoneParams, Violation};
use crate::lpcore::{LpError, SolveStatus};
use std::collections::BTreeMap;
use thiserror::Error;

/// Default number of tangent cuts for the comfort quadratic.
pub const DEFAULT_COMFORT_CUTS: usize = 16;

/// What a column means, by function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarRole {
    /// Building import power, kW (recourse per scenario in Level 2).
    Import,
    /// Building export power, kW (recourse per scenario in Level 2).
    Export,
    /// ESS charging power, kW.
    Charge,
    /// ESS discharging power, kW.
    Discharge,
    /// Stored energy at a step boundary, kWh.
    Soc,
    /// HVAC electrical power, kW.
    Hvac,
    /// ESS up-reserve capacity, kW.
    EssUp,
    /// ESS down-reserve capacity, kW.
    EssDn,
    /// HVAC up-reserve capacity, kW.
    HvacUp,
    /// HVAC down-reserve capacity, kW.
    HvacDn,
    /// Up-reserve provided by reducing charge, kW.
    ChargeUp,
    /// Down-reserve provided by extra charge, kW.
    ChargeDn,
    /// Up-reserve provided by extra discharge, kW.
    DischargeUp,
    /// Down-reserve provided by reducing discharge, kW.
    DischargeDn,
    /// Total committed up-reserve per zone, kW.
    FfrUp,
    /// Total committed down-reserve per zone, kW.
    FfrDn,
    /// Charging indicator (binary).
    ChargeOn,
    /// Discharging indicator (binary).
    DischargeOn,
    /// Linearized discomfort at the end-of-step temperature.
    Discomfort,
    /// Indoor temperature at a step boundary, °C.
    IndoorTemp,
    /// Community grid import, kW.
    GridImport,
    /// Community grid export, kW.
    GridExport,
    /// Balance relaxation, missing power side, kW.
    SlackDeficit,
    /// Balance relaxation, surplus power side, kW.
    SlackSurplus,
}

impl VarRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            VarRole::Import => "import",
            VarRole::Export => "export",
            VarRole::Charge => "charge",
            VarRole::Discharge => "discharge",
            VarRole::Soc => "soc",
            VarRole::Hvac => "hvac",
            VarRole::EssUp => "ess_up",
            VarRole::EssDn => "ess_dn",
            VarRole::HvacUp => "hvac_up",
            VarRole::HvacDn => "hvac_dn",
            VarRole::ChargeUp => "charge_up",
            VarRole::ChargeDn => "charge_dn",
            VarRole::DischargeUp => "discharge_up",
            VarRole::DischargeDn => "discharge_dn",
            VarRole::FfrUp => "ffr_up",
            VarRole::FfrDn => "ffr_dn",
            VarRole::ChargeOn => "charge_on",
            VarRole::DischargeOn => "discharge_on",
            VarRole::Discomfort => "discomfort",
            VarRole::IndoorTemp => "indoor_temp",
            VarRole::GridImport => "grid_import",
            VarRole::GridExport => "grid_export",
            VarRole::SlackDeficit => "slack_deficit",
            VarRole::SlackSurplus => "slack_surplus",
        }
    }

    pub fn parse(s: &str) -> Option<VarRole> {
        use VarRole::*;
        Some(match s {
            "import" => Import,
            "export" => Export,
            "charge" => Charge,
            "discharge" => Discharge,
            "soc" => Soc,
            "hvac" => Hvac,
            "ess_up" => EssUp,
            "ess_dn" => EssDn,
            "hvac_up" => HvacUp,
            "hvac_dn" => HvacDn,
            "charge_up" => ChargeUp,
            "charge_dn" => ChargeDn,
            "discharge_up" => DischargeUp,
            "discharge_dn" => DischargeDn,
            "ffr_up" => FfrUp,
            "ffr_dn" => FfrDn,
            "charge_on" => ChargeOn,
            "discharge_on" => DischargeOn,
            "discomfort" => Discomfort,
            "indoor_temp" => IndoorTemp,
            "grid_import" => GridImport,
            "grid_export" => GridExport,
            "slack_deficit" => SlackDeficit,
            "slack_surplus" => SlackSurplus,
            _ => return None,
        })
    }
}

impl std::fmt::Display for VarRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full identity of one decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarKey {
    pub role: VarRole,
    pub t: usize,
    pub b: Option<usize>,
    pub i: Option<usize>,
    pub s: Option<usize>,
}

impl VarKey {
    pub fn new(role: VarRole, t: usize) -> Self {
        VarKey {
            role,
            t,
            b: None,
            i: None,
            s: None,
        }
    }

    pub fn b(mut self, b: usize) -> Self {
        self.b = Some(b);
        self
    }

    pub fn i(mut self, i: usize) -> Self {
        self.i = Some(i);
        self
    }

    pub fn s(mut self, s: usize) -> Self {
        self.s = Some(s);
        self
    }
}

impl std::fmt::Display for VarKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}[t={}", self.role, self.t)?;
        if let Some(b) = self.b {
            write!(f, ",b={b}")?;
        }
        if let Some(i) = self.i {
            write!(f, ",i={i}")?;
        }
        if let Some(s) = self.s {
            write!(f, ",s={s}")?;
        }
        write!(f, "]")
    }
}

/// Bidirectional map between variable identities and column indices.
#[derive(Debug, Clone, Default)]
pub struct VarMap {
    forward: BTreeMap<VarKey, usize>,
    reverse: Vec<VarKey>,
}

impl VarMap {
    pub fn insert(&mut self, key: VarKey, idx: usize) {
        debug_assert_eq!(idx, self.reverse.len());
        let prior = self.forward.insert(key, idx);
        debug_assert!(prior.is_none(), "duplicate variable key {key}");
        self.reverse.push(key);
    }

    pub fn index(&self, key: &VarKey) -> Option<usize> {
        self.forward.get(key).copied()
    }

    pub fn key(&self, idx: usize) -> VarKey {
        self.reverse[idx]
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarKey, &usize)> {
        self.forward.iter()
    }
}

/// Which constraint family a row belongs to, for infeasibility
/// attribution and targeted re-checking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowFamily {
    Balance,
    GridLink,
    ThermalDynamics,
    ThermalReserve,
    ComfortCut,
    SocDynamics,
    ChargeGate,
    DischargeGate,
    ChargeExclusive,
    ReserveEnergy,
    ReservePower,
    ReserveWindow,
    ReserveSplit,
    HvacReserveCap,
    FfrCompose,
}

impl std::fmt::Display for RowFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RowFamily::Balance => "balance",
            RowFamily::GridLink => "grid_link",
            RowFamily::ThermalDynamics => "thermal_dynamics",
            RowFamily::ThermalReserve => "thermal_reserve",
            RowFamily::ComfortCut => "comfort_cut",
            RowFamily::SocDynamics => "soc_dynamics",
            RowFamily::ChargeGate => "charge_gate",
            RowFamily::DischargeGate => "discharge_gate",
            RowFamily::ChargeExclusive => "charge_exclusive",
            RowFamily::ReserveEnergy => "reserve_energy",
            RowFamily::ReservePower => "reserve_power",
            RowFamily::ReserveWindow => "reserve_window",
            RowFamily::ReserveSplit => "reserve_split",
            RowFamily::HvacReserveCap => "hvac_reserve_cap",
            RowFamily::FfrCompose => "ffr_compose",
        };
        f.write_str(s)
    }
}

/// Optimization mode: the pooled community or a single building billed
/// on its own meter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cems,
    Bems(usize),
}

impl Mode {
    /// Indices of the buildings present in this mode's problem.
    pub fn buildings(&self, total: usize) -> Vec<usize> {
        match self {
            Mode::Cems => (0..total).collect(),
            Mode::Bems(b) => vec![*b],
        }
    }
}

/// Committed reserve capacities from Level 1, the quantities Level 2 is
/// required to honor and Level 3 deploys.
#[derive(Debug, Clone, Default)]
pub struct FfrCommitment {
    /// `[t][b]` ESS up/down capacity, kW.
    pub ess_up: Vec<Vec<f64>>,
    pub ess_dn: Vec<Vec<f64>>,
    /// `[t][b][i]` HVAC up/down capacity, kW.
    pub hvac_up: Vec<Vec<Vec<f64>>>,
    pub hvac_dn: Vec<Vec<Vec<f64>>>,
}

impl FfrCommitment {
    pub fn zeros(horizon: usize, zone_counts: &[usize]) -> Self {
        let b = zone_counts.len();
        FfrCommitment {
            ess_up: vec![vec![0.0; b]; horizon],
            ess_dn: vec![vec![0.0; b]; horizon],
            hvac_up: (0..horizon)
                .map(|_| zone_counts.iter().map(|&z| vec![0.0; z]).collect())
                .collect(),
            hvac_dn: (0..horizon)
                .map(|_| zone_counts.iter().map(|&z| vec![0.0; z]).collect())
                .collect(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.ess_up.len()
    }

    /// Committed total up-reserve for a zone: ESS share plus HVAC share.
    pub fn total_up(&self, t: usize, b: usize, i: usize) -> f64 {
        self.ess_up[t][b] + self.hvac_up[t][b][i]
    }

    pub fn total_dn(&self, t: usize, b: usize, i: usize) -> f64 {
        self.ess_dn[t][b] + self.hvac_dn[t][b][i]
    }
}

/// Tangent under-estimators of the comfort quadratic over the comfort
/// band. Used as `discomfort ≥ slope·T + intercept` rows.
#[derive(Debug, Clone)]
pub struct ComfortCuts {
    pub tangents: Vec<(f64, f64)>,
}

impl ComfortCuts {
    /// Envelope value: the max over tangents at `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        self.tangents
            .iter()
            .map(|&(m, q)| m * t + q)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Tangents to the zone's discomfort quadratic at `k` equally spaced
/// touch points spanning the comfort band (endpoints included).
pub fn add_comfort_cuts(zone: &HvacZoneParams, k: usize) -> Result<ComfortCuts, ModelError> {
    if k < 2 {
        return Err(ModelError::CutCount(k));
    }
    let (a, b, c) = zone.comfort_coeffs;
    let span = zone.temp_max_c - zone.temp_min_c;
    let mut tangents = Vec::with_capacity(k);
    for j in 0..k {
        let x0 = zone.temp_min_c + span * j as f64 / (k - 1) as f64;
        let slope = 2.0 * a * x0 + b;
        let intercept = c - a * x0 * x0;
        tangents.push((slope, intercept));
    }
    Ok(ComfortCuts { tangents })
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("configuration invalid: {0:?}")]
    Config(Vec<Violation>),
    #[error("building {0} has no zones")]
    EmptyZones(String),
    #[error("need at least 2 comfort cuts, got {0}")]
    CutCount(usize),
    #[error("window start {k} outside horizon {horizon}")]
    BadWindow { k: usize, horizon: usize },
    #[error("input series length {got}, expected {expected} for {what}")]
    SeriesLength {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("commitment missing entries for window step {t}")]
    MissingCommitment { t: usize },
    #[error("schedule extraction requires an optimal solution, got {0:?}")]
    NotOptimal(SolveStatus),
    #[error("building index {0} out of range")]
    BadBuilding(usize),
    #[error(transparent)]
    Solver(#[from] LpError),
}
