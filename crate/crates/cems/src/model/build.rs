//! Emission of the Level-1 and Level-2 solver instances.
//!
//! Both levels share the device physics rows; they differ in billing
//! (community-pooled vs per-building), in uncertainty (single forecast
//! vs weighted scenario set with per-scenario import/export recourse and
//! elastic balance rows), and in whether reserve capacities are decision
//! variables (Level 1) or constants fixed to the day-ahead commitment
//! (Level 2, with only the charge/discharge split left free).

use super::{
    add_comfort_cuts, ComfortCuts, FfrCommitment, Mode, ModelError, RowFamily, VarKey, VarMap,
    VarRole,
};
use crate::domain::{pv_output, validate_config, CommunityConfig};
use crate::lpcore::{LinearProgram, MilpProblem, Sense, Solution};
use crate::scenario::ScenarioSet;

const INF: f64 = f64::INFINITY;

/// Collapses a bound pair inverted by rounding noise to its midpoint.
fn reconcile(lo: f64, hi: f64) -> (f64, f64) {
    if lo > hi && lo - hi < 1e-9 {
        let mid = 0.5 * (lo + hi);
        (mid, mid)
    } else {
        (lo, hi)
    }
}

/// A built problem: the MILP, the variable map, and per-row family tags
/// for attribution.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub problem: MilpProblem,
    pub vmap: VarMap,
    pub families: Vec<RowFamily>,
    /// Window covered by the instance: action steps `[k_start, k_end)`.
    pub k_start: usize,
    pub k_end: usize,
    pub mode: Mode,
    /// Scenario count baked into the instance (1 for Level 1).
    pub s_count: usize,
}

impl ModelInstance {
    /// Groups phase-1 residuals by constraint family, strongest first.
    pub fn attribute_infeasibility(&self, sol: &Solution) -> Vec<(RowFamily, f64)> {
        let mut totals: std::collections::BTreeMap<RowFamily, f64> = Default::default();
        for &(row, amount) in &sol.infeasible_rows {
            if row < self.families.len() {
                *totals.entry(self.families[row]).or_insert(0.0) += amount;
            }
        }
        let mut out: Vec<(RowFamily, f64)> = totals.into_iter().collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }
}

/// Per-scenario PV injection for the window, kW: `[s][t - k_start]`.
struct PvInjection {
    by_scenario: Vec<Vec<Vec<f64>>>, // [s][b][t - k_start]
}

struct Builder<'a> {
    cfg: &'a CommunityConfig,
    mode: Mode,
    k_start: usize,
    k_end: usize,
    buildings: Vec<usize>,
    weights: Vec<f64>,
    pv: PvInjection,
    commitment: Option<&'a FfrCommitment>,
    init_soc: Vec<f64>,        // by position in `buildings`
    init_temp: Vec<Vec<f64>>,  // by position in `buildings`, then zone
    cuts: Vec<Vec<ComfortCuts>>, // per building position, per zone
    lp: LinearProgram,
    vmap: VarMap,
    families: Vec<RowFamily>,
    binaries: Vec<usize>,
}

impl<'a> Builder<'a> {
    fn var(&mut self, key: VarKey, lo: f64, hi: f64, cost: f64) -> usize {
        let idx = self.lp.add_var(key.to_string(), lo, hi, cost);
        self.vmap.insert(key, idx);
        idx
    }

    fn idx(&self, key: VarKey) -> usize {
        self.vmap
            .index(&key)
            .unwrap_or_else(|| panic!("variable {key} not emitted"))
    }

    fn row(&mut self, family: RowFamily, name: String, sense: Sense, rhs: f64, coeffs: &[(usize, f64)]) {
        self.lp.add_row(name, sense, rhs, coeffs);
        self.families.push(family);
    }

    fn is_level2(&self) -> bool {
        self.commitment.is_some()
    }

    fn emit_variables(&mut self) {
        let dt = self.cfg.time.step_hours;
        let horizon = self.cfg.time.horizon_steps;
        let s_count = self.weights.len();
        let prices = &self.cfg.prices;
        let level2 = self.is_level2();
        let slack_price = 100.0
            * prices
                .lambda_import
                .iter()
                .cloned()
                .fold(0.0f64, f64::max)
                .max(1.0);

        for t in self.k_start..self.k_end {
            let lam_im = prices.lambda_import[t] * dt;
            let lam_ex = prices.lambda_export[t] * dt;
            for &b in self.buildings.clone().iter() {
                let bld = &self.cfg.buildings[b];
                let ess = &bld.ess;

                // Grid exchange: per scenario in Level 2, deterministic
                // in Level 1. Billing lands on these columns only in
                // per-building (BEMS) mode; the community mode bills the
                // pooled grid columns instead.
                let bill_here = matches!(self.mode, Mode::Bems(_));
                for s in 0..s_count {
                    let key_s = |role: VarRole| {
                        let k = VarKey::new(role, t).b(b);
                        if level2 {
                            k.s(s)
                        } else {
                            k
                        }
                    };
                    let w = self.weights[s];
                    self.var(
                        key_s(VarRole::Import),
                        0.0,
                        INF,
                        if bill_here { w * lam_im } else { 0.0 },
                    );
                    self.var(
                        key_s(VarRole::Export),
                        0.0,
                        INF,
                        if bill_here { -w * lam_ex } else { 0.0 },
                    );
                    if level2 {
                        self.var(key_s(VarRole::SlackDeficit), 0.0, INF, slack_price * dt);
                        self.var(key_s(VarRole::SlackSurplus), 0.0, INF, slack_price * dt);
                    }
                }

                self.var(VarKey::new(VarRole::Charge, t).b(b), 0.0, ess.p_ch_max_kw, 0.0);
                self.var(VarKey::new(VarRole::Discharge, t).b(b), 0.0, ess.p_dis_max_kw, 0.0);
                let z_ch = self.var(VarKey::new(VarRole::ChargeOn, t).b(b), 0.0, 1.0, 0.0);
                let z_dis = self.var(VarKey::new(VarRole::DischargeOn, t).b(b), 0.0, 1.0, 0.0);
                self.binaries.push(z_ch);
                self.binaries.push(z_dis);

                // Reserve split between the charge and discharge sides.
                self.var(VarKey::new(VarRole::ChargeUp, t).b(b), 0.0, INF, 0.0);
                self.var(VarKey::new(VarRole::ChargeDn, t).b(b), 0.0, INF, 0.0);
                self.var(VarKey::new(VarRole::DischargeUp, t).b(b), 0.0, INF, 0.0);
                self.var(VarKey::new(VarRole::DischargeDn, t).b(b), 0.0, INF, 0.0);

                if !level2 {
                    self.var(VarKey::new(VarRole::EssUp, t).b(b), 0.0, INF, 0.0);
                    self.var(VarKey::new(VarRole::EssDn, t).b(b), 0.0, INF, 0.0);
                }

                for i in 0..bld.zones.len() {
                    let zone = &bld.zones[i];
                    // HVAC power; with a fixed commitment the reserve
                    // headroom caps fold into the bounds.
                    let (mut h_lo, mut h_hi) = (0.0f64, zone.p_h_max_kw);
                    if let Some(c) = self.commitment {
                        h_lo = h_lo.max(c.hvac_up[t][b][i]);
                        h_hi = h_hi.min(zone.p_h_max_kw - c.hvac_dn[t][b][i]);
                    }
                    let (h_lo, h_hi) = reconcile(h_lo, h_hi);
                    self.var(VarKey::new(VarRole::Hvac, t).b(b).i(i), h_lo, h_hi, 0.0);
                    self.var(
                        VarKey::new(VarRole::Discomfort, t).b(b).i(i),
                        -INF,
                        INF,
                        prices.lambda_comfort * dt,
                    );
                    if !level2 {
                        self.var(VarKey::new(VarRole::HvacUp, t).b(b).i(i), 0.0, INF, 0.0);
                        self.var(VarKey::new(VarRole::HvacDn, t).b(b).i(i), 0.0, INF, 0.0);
                        self.var(
                            VarKey::new(VarRole::FfrUp, t).b(b).i(i),
                            0.0,
                            INF,
                            -prices.lambda_ffr * dt,
                        );
                        self.var(
                            VarKey::new(VarRole::FfrDn, t).b(b).i(i),
                            0.0,
                            INF,
                            -prices.lambda_ffr * dt,
                        );
                    }
                }
            }

            if matches!(self.mode, Mode::Cems) {
                for s in 0..s_count {
                    let key_s = |role: VarRole| {
                        let k = VarKey::new(role, t);
                        if level2 {
                            k.s(s)
                        } else {
                            k
                        }
                    };
                    let w = self.weights[s];
                    self.var(key_s(VarRole::GridImport), 0.0, INF, w * lam_im);
                    self.var(key_s(VarRole::GridExport), 0.0, INF, -w * lam_ex);
                }
            }
        }

        // State trajectories: step boundaries k_start ..= k_end.
        for (pos, &b) in self.buildings.clone().iter().enumerate() {
            let bld = &self.cfg.buildings[b];
            let ess = &bld.ess;
            for t in self.k_start..=self.k_end {
                let (lo, hi) = if t == self.k_start {
                    (self.init_soc[pos], self.init_soc[pos])
                } else if t == horizon {
                    (ess.soc_boundary_kwh(), ess.soc_boundary_kwh())
                } else {
                    let mut lo = ess.soc_lower_kwh();
                    let mut hi = ess.soc_upper_kwh();
                    // The reserve-window rule with a fixed commitment
                    // tightens the corridor at action steps.
                    if let Some(c) = self.commitment {
                        if t < self.k_end {
                            lo = lo.max(ess.e_min_kwh + c.ess_dn[t][b]);
                            hi = hi.min(ess.e_max_kwh - c.ess_up[t][b]);
                        }
                    }
                    reconcile(lo, hi)
                };
                self.var(VarKey::new(VarRole::Soc, t).b(b), lo, hi, 0.0);
            }
            for (i, zone) in bld.zones.iter().enumerate() {
                let a = zone.retention(dt);
                for t in self.k_start..=self.k_end {
                    let (lo, hi) = if t == self.k_start {
                        (self.init_temp[pos][i], self.init_temp[pos][i])
                    } else {
                        let mut lo = zone.temp_min_c;
                        let mut hi = zone.temp_max_c;
                        if let Some(c) = self.commitment {
                            // Committed reserve thermal feasibility rows
                            // become temperature bounds at action steps.
                            if t < self.k_end {
                                let drive = dt / zone.thermal_resistance;
                                hi = hi.min(
                                    (zone.temp_max_c
                                        - drive
                                            * (self.cfg.exogenous.t_out[t]
                                                - zone.cop * c.hvac_dn[t][b][i]))
                                        / a,
                                );
                                lo = lo.max(
                                    (zone.temp_min_c
                                        - drive
                                            * (self.cfg.exogenous.t_out[t]
                                                - zone.cop * c.hvac_up[t][b][i]))
                                        / a,
                                );
                            }
                        }
                        reconcile(lo, hi)
                    };
                    self.var(VarKey::new(VarRole::IndoorTemp, t).b(b).i(i), lo, hi, 0.0);
                }
            }
        }
    }

    fn emit_rows(&mut self) {
        let dt = self.cfg.time.step_hours;
        let s_count = self.weights.len();
        let level2 = self.is_level2();
        let buildings = self.buildings.clone();

        for t in self.k_start..self.k_end {
            let rel = t - self.k_start;

            // Power balance per building (per scenario in Level 2) and
            // the pooled community link.
            for s in 0..s_count {
                let key_s = |role: VarRole, b: usize| {
                    let k = VarKey::new(role, t).b(b);
                    if level2 {
                        k.s(s)
                    } else {
                        k
                    }
                };
                for (pos, &b) in buildings.iter().enumerate() {
                    let bld = &self.cfg.buildings[b];
                    let mut coeffs = vec![
                        (self.idx(key_s(VarRole::Import, b)), 1.0),
                        (self.idx(VarKey::new(VarRole::Discharge, t).b(b)), 1.0),
                        (self.idx(VarKey::new(VarRole::Charge, t).b(b)), -1.0),
                        (self.idx(key_s(VarRole::Export, b)), -1.0),
                    ];
                    for i in 0..bld.zones.len() {
                        coeffs.push((self.idx(VarKey::new(VarRole::Hvac, t).b(b).i(i)), -1.0));
                    }
                    if level2 {
                        coeffs.push((self.idx(key_s(VarRole::SlackDeficit, b)), 1.0));
                        coeffs.push((self.idx(key_s(VarRole::SlackSurplus, b)), -1.0));
                    }
                    let rhs = bld.demand_load[t] + bld.demand_ev[t] - self.pv.by_scenario[s][pos][rel];
                    let name = if level2 {
                        format!("balance[t={t},b={b},s={s}]")
                    } else {
                        format!("balance[t={t},b={b}]")
                    };
                    self.row(RowFamily::Balance, name, Sense::Eq, rhs, &coeffs);
                }

                if matches!(self.mode, Mode::Cems) {
                    let gkey = |role: VarRole| {
                        let k = VarKey::new(role, t);
                        if level2 {
                            k.s(s)
                        } else {
                            k
                        }
                    };
                    let mut coeffs = vec![
                        (self.idx(gkey(VarRole::GridImport)), 1.0),
                        (self.idx(gkey(VarRole::GridExport)), -1.0),
                    ];
                    for &b in &buildings {
                        coeffs.push((self.idx(key_s(VarRole::Import, b)), -1.0));
                        coeffs.push((self.idx(key_s(VarRole::Export, b)), 1.0));
                    }
                    let name = if level2 {
                        format!("grid_link[t={t},s={s}]")
                    } else {
                        format!("grid_link[t={t}]")
                    };
                    self.row(RowFamily::GridLink, name, Sense::Eq, 0.0, &coeffs);
                }
            }

            for (pos, &b) in buildings.iter().enumerate() {
                let bld = &self.cfg.buildings[b];
                let ess = &bld.ess;

                // Storage dynamics and the charge/discharge machinery.
                let charge = self.idx(VarKey::new(VarRole::Charge, t).b(b));
                let discharge = self.idx(VarKey::new(VarRole::Discharge, t).b(b));
                let z_ch = self.idx(VarKey::new(VarRole::ChargeOn, t).b(b));
                let z_dis = self.idx(VarKey::new(VarRole::DischargeOn, t).b(b));
                let soc_now = self.idx(VarKey::new(VarRole::Soc, t).b(b));
                let soc_next = self.idx(VarKey::new(VarRole::Soc, t + 1).b(b));
                self.row(
                    RowFamily::SocDynamics,
                    format!("soc_dynamics[t={t},b={b}]"),
                    Sense::Eq,
                    0.0,
                    &[
                        (soc_next, 1.0),
                        (soc_now, -1.0),
                        (charge, -dt * ess.eta_ch),
                        (discharge, dt / ess.eta_dis),
                    ],
                );
                self.row(
                    RowFamily::ChargeGate,
                    format!("charge_gate[t={t},b={b}]"),
                    Sense::Le,
                    0.0,
                    &[(charge, 1.0), (z_ch, -ess.p_ch_max_kw)],
                );
                self.row(
                    RowFamily::DischargeGate,
                    format!("discharge_gate[t={t},b={b}]"),
                    Sense::Le,
                    0.0,
                    &[(discharge, 1.0), (z_dis, -ess.p_dis_max_kw)],
                );
                self.row(
                    RowFamily::ChargeExclusive,
                    format!("charge_exclusive[t={t},b={b}]"),
                    Sense::Le,
                    1.0,
                    &[(z_ch, 1.0), (z_dis, 1.0)],
                );

                // Reserve power limits on each side of the converter.
                let ch_up = self.idx(VarKey::new(VarRole::ChargeUp, t).b(b));
                let ch_dn = self.idx(VarKey::new(VarRole::ChargeDn, t).b(b));
                let dis_up = self.idx(VarKey::new(VarRole::DischargeUp, t).b(b));
                let dis_dn = self.idx(VarKey::new(VarRole::DischargeDn, t).b(b));
                self.row(
                    RowFamily::ReservePower,
                    format!("reserve_power_dis_up[t={t},b={b}]"),
                    Sense::Le,
                    ess.p_dis_max_kw,
                    &[(discharge, 1.0), (dis_up, 1.0)],
                );
                self.row(
                    RowFamily::ReservePower,
                    format!("reserve_power_dis_dn[t={t},b={b}]"),
                    Sense::Ge,
                    ess.p_dis_min_kw,
                    &[(discharge, 1.0), (dis_dn, -1.0)],
                );
                self.row(
                    RowFamily::ReservePower,
                    format!("reserve_power_ch_up[t={t},b={b}]"),
                    Sense::Ge,
                    ess.p_ch_min_kw,
                    &[(charge, 1.0), (ch_up, -1.0)],
                );
                self.row(
                    RowFamily::ReservePower,
                    format!("reserve_power_ch_dn[t={t},b={b}]"),
                    Sense::Le,
                    ess.p_ch_max_kw,
                    &[(charge, 1.0), (ch_dn, 1.0)],
                );

                // Deployment-adjusted stored energy stays inside the
                // reserve corridor for a full step of activation.
                self.row(
                    RowFamily::ReserveEnergy,
                    format!("reserve_energy_up[t={t},b={b}]"),
                    Sense::Ge,
                    ess.e_min_kwh,
                    &[
                        (soc_next, 1.0),
                        (ch_up, -dt * ess.eta_ch),
                        (dis_up, -dt / ess.eta_dis),
                    ],
                );
                self.row(
                    RowFamily::ReserveEnergy,
                    format!("reserve_energy_dn[t={t},b={b}]"),
                    Sense::Le,
                    ess.e_max_kwh,
                    &[
                        (soc_next, 1.0),
                        (ch_dn, dt * ess.eta_ch),
                        (dis_dn, dt / ess.eta_dis),
                    ],
                );

                if !level2 {
                    // Composed ESS reserve, its SoC window, and the
                    // zone-level composition rows.
                    let ess_up = self.idx(VarKey::new(VarRole::EssUp, t).b(b));
                    let ess_dn = self.idx(VarKey::new(VarRole::EssDn, t).b(b));
                    self.row(
                        RowFamily::ReserveSplit,
                        format!("reserve_split_up[t={t},b={b}]"),
                        Sense::Eq,
                        0.0,
                        &[(ess_up, 1.0), (ch_up, -1.0), (dis_up, -1.0)],
                    );
                    self.row(
                        RowFamily::ReserveSplit,
                        format!("reserve_split_dn[t={t},b={b}]"),
                        Sense::Eq,
                        0.0,
                        &[(ess_dn, 1.0), (ch_dn, -1.0), (dis_dn, -1.0)],
                    );
                    self.row(
                        RowFamily::ReserveWindow,
                        format!("reserve_window_lo[t={t},b={b}]"),
                        Sense::Ge,
                        ess.e_min_kwh,
                        &[(soc_now, 1.0), (ess_dn, -1.0)],
                    );
                    self.row(
                        RowFamily::ReserveWindow,
                        format!("reserve_window_hi[t={t},b={b}]"),
                        Sense::Le,
                        ess.e_max_kwh,
                        &[(soc_now, 1.0), (ess_up, 1.0)],
                    );
                } else {
                    // Level 2: the committed ESS totals pin the split.
                    let c = self.commitment.unwrap();
                    self.row(
                        RowFamily::ReserveSplit,
                        format!("reserve_split_up[t={t},b={b}]"),
                        Sense::Eq,
                        c.ess_up[t][b],
                        &[(ch_up, 1.0), (dis_up, 1.0)],
                    );
                    self.row(
                        RowFamily::ReserveSplit,
                        format!("reserve_split_dn[t={t},b={b}]"),
                        Sense::Eq,
                        c.ess_dn[t][b],
                        &[(ch_dn, 1.0), (dis_dn, 1.0)],
                    );
                }

                for (i, zone) in bld.zones.iter().enumerate() {
                    let a = zone.retention(dt);
                    let drive = dt / zone.thermal_resistance;
                    let hvac = self.idx(VarKey::new(VarRole::Hvac, t).b(b).i(i));
                    let temp_now = self.idx(VarKey::new(VarRole::IndoorTemp, t).b(b).i(i));
                    let temp_next = self.idx(VarKey::new(VarRole::IndoorTemp, t + 1).b(b).i(i));
                    let sigma = self.idx(VarKey::new(VarRole::Discomfort, t).b(b).i(i));

                    self.row(
                        RowFamily::ThermalDynamics,
                        format!("thermal_dynamics[t={t},b={b},i={i}]"),
                        Sense::Eq,
                        drive * self.cfg.exogenous.t_out[t],
                        &[
                            (temp_next, 1.0),
                            (temp_now, -a),
                            (hvac, drive * zone.cop),
                        ],
                    );

                    for (ci, &(slope, intercept)) in
                        self.cuts[pos][i].tangents.clone().iter().enumerate()
                    {
                        self.row(
                            RowFamily::ComfortCut,
                            format!("comfort_cut[t={t},b={b},i={i},c={ci}]"),
                            Sense::Ge,
                            intercept,
                            &[(sigma, 1.0), (temp_next, -slope)],
                        );
                    }

                    if !level2 {
                        let h_up = self.idx(VarKey::new(VarRole::HvacUp, t).b(b).i(i));
                        let h_dn = self.idx(VarKey::new(VarRole::HvacDn, t).b(b).i(i));
                        let f_up = self.idx(VarKey::new(VarRole::FfrUp, t).b(b).i(i));
                        let f_dn = self.idx(VarKey::new(VarRole::FfrDn, t).b(b).i(i));
                        let ess_up = self.idx(VarKey::new(VarRole::EssUp, t).b(b));
                        let ess_dn = self.idx(VarKey::new(VarRole::EssDn, t).b(b));

                        // Committed reserve thermal feasibility.
                        self.row(
                            RowFamily::ThermalReserve,
                            format!("thermal_reserve_dn[t={t},b={b},i={i}]"),
                            Sense::Le,
                            zone.temp_max_c - drive * self.cfg.exogenous.t_out[t],
                            &[(temp_now, a), (h_dn, -drive * zone.cop)],
                        );
                        self.row(
                            RowFamily::ThermalReserve,
                            format!("thermal_reserve_up[t={t},b={b},i={i}]"),
                            Sense::Ge,
                            zone.temp_min_c - drive * self.cfg.exogenous.t_out[t],
                            &[(temp_now, a), (h_up, -drive * zone.cop)],
                        );

                        // Device headroom for HVAC reserve deployment.
                        self.row(
                            RowFamily::HvacReserveCap,
                            format!("hvac_cap_up[t={t},b={b},i={i}]"),
                            Sense::Le,
                            0.0,
                            &[(h_up, 1.0), (hvac, -1.0)],
                        );
                        self.row(
                            RowFamily::HvacReserveCap,
                            format!("hvac_cap_dn[t={t},b={b},i={i}]"),
                            Sense::Le,
                            zone.p_h_max_kw,
                            &[(h_dn, 1.0), (hvac, 1.0)],
                        );

                        // Zone commitment = ESS share + HVAC share.
                        self.row(
                            RowFamily::FfrCompose,
                            format!("ffr_compose_up[t={t},b={b},i={i}]"),
                            Sense::Eq,
                            0.0,
                            &[(f_up, 1.0), (ess_up, -1.0), (h_up, -1.0)],
                        );
                        self.row(
                            RowFamily::FfrCompose,
                            format!("ffr_compose_dn[t={t},b={b},i={i}]"),
                            Sense::Eq,
                            0.0,
                            &[(f_dn, 1.0), (ess_dn, -1.0), (h_dn, -1.0)],
                        );
                    }
                }
            }
        }
    }

    fn finish(mut self) -> ModelInstance {
        self.emit_variables();
        self.emit_rows();
        ModelInstance {
            problem: MilpProblem {
                lp: self.lp,
                binary_vars: self.binaries,
            },
            vmap: self.vmap,
            families: self.families,
            k_start: self.k_start,
            k_end: self.k_end,
            mode: self.mode,
            s_count: self.weights.len(),
        }
    }
}

fn checked_mode(cfg: &CommunityConfig, mode: Mode) -> Result<Vec<usize>, ModelError> {
    let violations = validate_config(cfg);
    if !violations.is_empty() {
        return Err(ModelError::Config(violations));
    }
    if let Mode::Bems(b) = mode {
        if b >= cfg.buildings.len() {
            return Err(ModelError::BadBuilding(b));
        }
    }
    let buildings = mode.buildings(cfg.buildings.len());
    for &b in &buildings {
        if cfg.buildings[b].zones.is_empty() {
            return Err(ModelError::EmptyZones(cfg.buildings[b].id.clone()));
        }
    }
    Ok(buildings)
}

fn zone_cuts(
    cfg: &CommunityConfig,
    buildings: &[usize],
    cut_count: usize,
) -> Result<Vec<Vec<ComfortCuts>>, ModelError> {
    buildings
        .iter()
        .map(|&b| {
            cfg.buildings[b]
                .zones
                .iter()
                .map(|z| add_comfort_cuts(z, cut_count))
                .collect()
        })
        .collect()
}

/// Builds the day-ahead allocation MILP over the full horizon against a
/// single irradiance forecast. Reserve capacities are decision
/// variables; the objective trades import cost against export revenue,
/// comfort penalties and reserve revenue.
pub fn build_level1(
    cfg: &CommunityConfig,
    pv_scenario: &[f64],
    mode: Mode,
    cut_count: usize,
) -> Result<ModelInstance, ModelError> {
    let buildings = checked_mode(cfg, mode)?;
    let horizon = cfg.time.horizon_steps;
    if pv_scenario.len() != horizon {
        return Err(ModelError::SeriesLength {
            what: "pv_scenario",
            got: pv_scenario.len(),
            expected: horizon,
        });
    }
    if pv_scenario.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(ModelError::SeriesLength {
            what: "pv_scenario (negative or non-finite irradiance)",
            got: pv_scenario.len(),
            expected: horizon,
        });
    }
    let cuts = zone_cuts(cfg, &buildings, cut_count)?;

    let pv_rows: Vec<Vec<f64>> = buildings
        .iter()
        .map(|&b| {
            pv_scenario
                .iter()
                .map(|&g| pv_output(&cfg.buildings[b].pv, g).unwrap_or(0.0))
                .collect()
        })
        .collect();

    let init_soc: Vec<f64> = buildings
        .iter()
        .map(|&b| cfg.buildings[b].ess.soc_boundary_kwh())
        .collect();
    let init_temp: Vec<Vec<f64>> = buildings
        .iter()
        .map(|&b| cfg.buildings[b].zones.iter().map(|z| z.temp_init_c).collect())
        .collect();

    let builder = Builder {
        cfg,
        mode,
        k_start: 0,
        k_end: horizon,
        buildings,
        weights: vec![1.0],
        pv: PvInjection {
            by_scenario: vec![pv_rows],
        },
        commitment: None,
        init_soc,
        init_temp,
        cuts,
        lp: LinearProgram::new(),
        vmap: VarMap::default(),
        families: Vec::new(),
        binaries: Vec::new(),
    };
    Ok(builder.finish())
}

/// Builds the rolling-window stochastic re-scheduling MILP over
/// `[k, min(k+n, horizon))`, with per-scenario import/export recourse,
/// elastic balance rows, reserve capacities pinned to the commitment,
/// and state re-initialization from the plant.
#[allow(clippy::too_many_arguments)]
pub fn build_level2(
    cfg: &CommunityConfig,
    scenarios: &ScenarioSet,
    k: usize,
    n: usize,
    commitment: &FfrCommitment,
    soc_now: &[f64],
    temp_now: &[Vec<f64>],
    mode: Mode,
    cut_count: usize,
) -> Result<ModelInstance, ModelError> {
    let buildings = checked_mode(cfg, mode)?;
    let horizon = cfg.time.horizon_steps;
    if k >= horizon || n == 0 {
        return Err(ModelError::BadWindow { k, horizon });
    }
    let k_end = (k + n).min(horizon);
    if commitment.horizon() < k_end {
        return Err(ModelError::MissingCommitment {
            t: commitment.horizon(),
        });
    }
    if soc_now.len() != buildings.len() || temp_now.len() != buildings.len() {
        return Err(ModelError::SeriesLength {
            what: "plant state",
            got: soc_now.len(),
            expected: buildings.len(),
        });
    }
    let cuts = zone_cuts(cfg, &buildings, cut_count)?;

    let by_scenario: Vec<Vec<Vec<f64>>> = scenarios
        .scenarios
        .iter()
        .map(|series| {
            buildings
                .iter()
                .map(|&b| {
                    (k..k_end)
                        .map(|t| pv_output(&cfg.buildings[b].pv, series[t]).unwrap_or(0.0))
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut lp = LinearProgram::new();
    // Reserve revenue for the window is fixed by the commitment: fold it
    // in as an objective constant so window objectives remain comparable
    // with the day-ahead objective restricted to the same steps.
    let dt = cfg.time.step_hours;
    let mut offset = 0.0;
    for t in k..k_end {
        for &b in &buildings {
            for i in 0..cfg.buildings[b].zones.len() {
                offset -= cfg.prices.lambda_ffr
                    * dt
                    * (commitment.total_up(t, b, i) + commitment.total_dn(t, b, i));
            }
        }
    }
    lp.objective_offset = offset;

    let builder = Builder {
        cfg,
        mode,
        k_start: k,
        k_end,
        buildings,
        weights: scenarios.weights.clone(),
        pv: PvInjection { by_scenario },
        commitment: Some(commitment),
        init_soc: soc_now.to_vec(),
        init_temp: temp_now.to_vec(),
        cuts,
        lp,
        vmap: VarMap::default(),
        families: Vec::new(),
        binaries: Vec::new(),
    };
    Ok(builder.finish())
}
