//! Independent re-derivation of every model constraint from the
//! configuration and an extracted schedule. Deliberately bypasses the
//! emitted rows: it recomputes each physical relation from the raw
//! parameters so builder bugs and solver bugs are both caught.

use super::{add_comfort_cuts, FfrCommitment, Mode, Schedule, VarKey, VarRole};
use crate::domain::{pv_output, CommunityConfig, Violation};

/// What to audit: which window, which mode, which uncertainty.
pub struct AuditScope<'a> {
    pub cfg: &'a CommunityConfig,
    pub mode: Mode,
    /// Irradiance per scenario over the full horizon, W/m².
    pub irradiance: &'a [Vec<f64>],
    pub k_start: usize,
    pub k_end: usize,
    /// Present for Level-2 schedules: reserves are these constants and
    /// import/export/slack columns are scenario-indexed.
    pub commitment: Option<&'a FfrCommitment>,
    pub cut_count: usize,
}

struct Audit<'a> {
    scope: &'a AuditScope<'a>,
    schedule: &'a Schedule,
    tol: f64,
    out: Vec<Violation>,
}

impl<'a> Audit<'a> {
    fn flag(&mut self, path: String, message: String) {
        self.out.push(Violation { path, message });
    }

    fn check_le(&mut self, path: &str, lhs: f64, rhs: f64) {
        if lhs > rhs + self.tol {
            self.flag(path.into(), format!("{lhs} exceeds {rhs} by {}", lhs - rhs));
        }
    }

    fn check_ge(&mut self, path: &str, lhs: f64, rhs: f64) {
        if lhs < rhs - self.tol {
            self.flag(path.into(), format!("{lhs} below {rhs} by {}", rhs - lhs));
        }
    }

    fn check_eq(&mut self, path: &str, lhs: f64, rhs: f64) {
        if (lhs - rhs).abs() > self.tol {
            self.flag(
                path.into(),
                format!("residual {} exceeds {}", (lhs - rhs).abs(), self.tol),
            );
        }
    }

    fn val(&self, key: VarKey) -> f64 {
        self.schedule.require(&key)
    }

    fn exchange_key(&self, role: VarRole, t: usize, b: usize, s: usize) -> VarKey {
        let k = VarKey::new(role, t).b(b);
        if self.scope.commitment.is_some() {
            k.s(s)
        } else {
            k
        }
    }

    fn grid_key(&self, role: VarRole, t: usize, s: usize) -> VarKey {
        let k = VarKey::new(role, t);
        if self.scope.commitment.is_some() {
            k.s(s)
        } else {
            k
        }
    }

    fn run(&mut self) {
        let cfg = self.scope.cfg;
        let dt = cfg.time.step_hours;
        let horizon = cfg.time.horizon_steps;
        let buildings = self.scope.mode.buildings(cfg.buildings.len());
        let s_count = if self.scope.commitment.is_some() {
            self.scope.irradiance.len()
        } else {
            1
        };
        let level2 = self.scope.commitment.is_some();

        for t in self.scope.k_start..self.scope.k_end {
            for s in 0..s_count {
                // Power balance, per building.
                let mut community_net = 0.0;
                for &b in &buildings {
                    let bld = &cfg.buildings[b];
                    let pv = pv_output(&bld.pv, self.scope.irradiance[s][t]).unwrap_or(0.0);
                    let import = self.val(self.exchange_key(VarRole::Import, t, b, s));
                    let export = self.val(self.exchange_key(VarRole::Export, t, b, s));
                    let charge = self.val(VarKey::new(VarRole::Charge, t).b(b));
                    let discharge = self.val(VarKey::new(VarRole::Discharge, t).b(b));
                    let hvac_total: f64 = (0..bld.zones.len())
                        .map(|i| self.val(VarKey::new(VarRole::Hvac, t).b(b).i(i)))
                        .sum();
                    let (slack_def, slack_sur) = if level2 {
                        (
                            self.val(self.exchange_key(VarRole::SlackDeficit, t, b, s)),
                            self.val(self.exchange_key(VarRole::SlackSurplus, t, b, s)),
                        )
                    } else {
                        (0.0, 0.0)
                    };
                    let lhs = pv + discharge + import + slack_def;
                    let rhs = charge
                        + hvac_total
                        + export
                        + slack_sur
                        + bld.demand_ev[t]
                        + bld.demand_load[t];
                    self.check_eq(&format!("balance[t={t},b={b},s={s}]"), lhs, rhs);
                    community_net += import - export;
                }

                if matches!(self.scope.mode, Mode::Cems) {
                    let g_im = self.val(self.grid_key(VarRole::GridImport, t, s));
                    let g_ex = self.val(self.grid_key(VarRole::GridExport, t, s));
                    self.check_eq(&format!("grid_link[t={t},s={s}]"), g_im - g_ex, community_net);
                    self.check_ge(&format!("grid_import[t={t},s={s}]"), g_im, 0.0);
                    self.check_ge(&format!("grid_export[t={t},s={s}]"), g_ex, 0.0);
                }
            }

            for &b in &buildings {
                let bld = &cfg.buildings[b];
                let ess = &bld.ess;
                let charge = self.val(VarKey::new(VarRole::Charge, t).b(b));
                let discharge = self.val(VarKey::new(VarRole::Discharge, t).b(b));
                let z_ch = self.val(VarKey::new(VarRole::ChargeOn, t).b(b));
                let z_dis = self.val(VarKey::new(VarRole::DischargeOn, t).b(b));
                let soc_now = self.val(VarKey::new(VarRole::Soc, t).b(b));
                let soc_next = self.val(VarKey::new(VarRole::Soc, t + 1).b(b));

                // Storage dynamics and the exclusion machinery.
                self.check_eq(
                    &format!("soc_dynamics[t={t},b={b}]"),
                    soc_next,
                    soc_now + dt * (ess.eta_ch * charge - discharge / ess.eta_dis),
                );
                if (z_ch - z_ch.round()).abs() > 1e-9 || (z_dis - z_dis.round()).abs() > 1e-9 {
                    self.flag(
                        format!("binary[t={t},b={b}]"),
                        format!("indicators not integral: {z_ch}, {z_dis}"),
                    );
                }
                self.check_le(&format!("charge_exclusive[t={t},b={b}]"), z_ch + z_dis, 1.0);
                self.check_le(
                    &format!("charge_gate[t={t},b={b}]"),
                    charge,
                    ess.p_ch_max_kw * z_ch,
                );
                self.check_le(
                    &format!("discharge_gate[t={t},b={b}]"),
                    discharge,
                    ess.p_dis_max_kw * z_dis,
                );

                // Reserve split and its power/energy feasibility.
                let ch_up = self.val(VarKey::new(VarRole::ChargeUp, t).b(b));
                let ch_dn = self.val(VarKey::new(VarRole::ChargeDn, t).b(b));
                let dis_up = self.val(VarKey::new(VarRole::DischargeUp, t).b(b));
                let dis_dn = self.val(VarKey::new(VarRole::DischargeDn, t).b(b));
                for (name, v) in [
                    ("charge_up", ch_up),
                    ("charge_dn", ch_dn),
                    ("discharge_up", dis_up),
                    ("discharge_dn", dis_dn),
                ] {
                    self.check_ge(&format!("{name}[t={t},b={b}]"), v, 0.0);
                }
                let (ess_up, ess_dn) = match self.scope.commitment {
                    Some(c) => (c.ess_up[t][b], c.ess_dn[t][b]),
                    None => (
                        self.val(VarKey::new(VarRole::EssUp, t).b(b)),
                        self.val(VarKey::new(VarRole::EssDn, t).b(b)),
                    ),
                };
                self.check_eq(&format!("reserve_split_up[t={t},b={b}]"), ess_up, ch_up + dis_up);
                self.check_eq(&format!("reserve_split_dn[t={t},b={b}]"), ess_dn, ch_dn + dis_dn);

                self.check_le(
                    &format!("reserve_power_dis_up[t={t},b={b}]"),
                    discharge + dis_up,
                    ess.p_dis_max_kw,
                );
                self.check_ge(
                    &format!("reserve_power_dis_dn[t={t},b={b}]"),
                    discharge - dis_dn,
                    ess.p_dis_min_kw,
                );
                self.check_ge(
                    &format!("reserve_power_ch_up[t={t},b={b}]"),
                    charge - ch_up,
                    ess.p_ch_min_kw,
                );
                self.check_le(
                    &format!("reserve_power_ch_dn[t={t},b={b}]"),
                    charge + ch_dn,
                    ess.p_ch_max_kw,
                );

                self.check_ge(
                    &format!("reserve_energy_up[t={t},b={b}]"),
                    soc_next - dt * (ess.eta_ch * ch_up + dis_up / ess.eta_dis),
                    ess.e_min_kwh,
                );
                self.check_le(
                    &format!("reserve_energy_dn[t={t},b={b}]"),
                    soc_next + dt * (ess.eta_ch * ch_dn + dis_dn / ess.eta_dis),
                    ess.e_max_kwh,
                );

                // Reserve SoC window; with a measured initial state the
                // first window step is state, not decision.
                if !(level2 && t == self.scope.k_start) {
                    self.check_ge(
                        &format!("reserve_window_lo[t={t},b={b}]"),
                        soc_now,
                        ess.e_min_kwh + ess_dn,
                    );
                    self.check_le(
                        &format!("reserve_window_hi[t={t},b={b}]"),
                        soc_now,
                        ess.e_max_kwh - ess_up,
                    );
                }

                for (i, zone) in bld.zones.iter().enumerate() {
                    let a = zone.retention(dt);
                    let drive = dt / zone.thermal_resistance;
                    let hvac = self.val(VarKey::new(VarRole::Hvac, t).b(b).i(i));
                    let temp_now = self.val(VarKey::new(VarRole::IndoorTemp, t).b(b).i(i));
                    let temp_next = self.val(VarKey::new(VarRole::IndoorTemp, t + 1).b(b).i(i));
                    let sigma = self.val(VarKey::new(VarRole::Discomfort, t).b(b).i(i));

                    self.check_ge(&format!("hvac[t={t},b={b},i={i}]"), hvac, 0.0);
                    self.check_le(&format!("hvac[t={t},b={b},i={i}]"), hvac, zone.p_h_max_kw);

                    self.check_eq(
                        &format!("thermal_dynamics[t={t},b={b},i={i}]"),
                        temp_next,
                        a * temp_now + drive * (cfg.exogenous.t_out[t] - zone.cop * hvac),
                    );

                    // Cut envelope: lower bounds always; tightness when
                    // discomfort is actually priced.
                    let cuts = add_comfort_cuts(zone, self.scope.cut_count).expect("cut count");
                    let envelope = cuts.envelope(temp_next);
                    self.check_ge(&format!("comfort_cut[t={t},b={b},i={i}]"), sigma, envelope);
                    if cfg.prices.lambda_comfort > 0.0 && sigma > envelope + 1e-7 {
                        self.flag(
                            format!("comfort_tightness[t={t},b={b},i={i}]"),
                            format!("sigma {sigma} above envelope {envelope}"),
                        );
                    }

                    let (h_up, h_dn) = match self.scope.commitment {
                        Some(c) => (c.hvac_up[t][b][i], c.hvac_dn[t][b][i]),
                        None => (
                            self.val(VarKey::new(VarRole::HvacUp, t).b(b).i(i)),
                            self.val(VarKey::new(VarRole::HvacDn, t).b(b).i(i)),
                        ),
                    };
                    self.check_ge(&format!("hvac_up[t={t},b={b},i={i}]"), h_up, 0.0);
                    self.check_ge(&format!("hvac_dn[t={t},b={b},i={i}]"), h_dn, 0.0);
                    self.check_le(&format!("hvac_cap_up[t={t},b={b},i={i}]"), h_up, hvac);
                    self.check_le(
                        &format!("hvac_cap_dn[t={t},b={b},i={i}]"),
                        hvac + h_dn,
                        zone.p_h_max_kw,
                    );

                    // Reserve-adjusted one-step temperature stays in the
                    // comfort band (skipped where the temperature is a
                    // measurement, as with the SoC window above).
                    if !(level2 && t == self.scope.k_start) {
                        let predicted_dn =
                            a * temp_now + drive * (cfg.exogenous.t_out[t] - zone.cop * h_dn);
                        self.check_le(
                            &format!("thermal_reserve_dn[t={t},b={b},i={i}]"),
                            predicted_dn,
                            zone.temp_max_c,
                        );
                        let predicted_up =
                            a * temp_now + drive * (cfg.exogenous.t_out[t] - zone.cop * h_up);
                        self.check_ge(
                            &format!("thermal_reserve_up[t={t},b={b},i={i}]"),
                            predicted_up,
                            zone.temp_min_c,
                        );
                    }

                    if !level2 {
                        let f_up = self.val(VarKey::new(VarRole::FfrUp, t).b(b).i(i));
                        let f_dn = self.val(VarKey::new(VarRole::FfrDn, t).b(b).i(i));
                        self.check_eq(
                            &format!("ffr_compose_up[t={t},b={b},i={i}]"),
                            f_up,
                            ess_up + h_up,
                        );
                        self.check_eq(
                            &format!("ffr_compose_dn[t={t},b={b},i={i}]"),
                            f_dn,
                            ess_dn + h_dn,
                        );
                    }
                }
            }
        }

        // State corridors over the whole window, boundary pins included.
        for &b in &buildings {
            let ess = &cfg.buildings[b].ess;
            for t in self.scope.k_start..=self.scope.k_end {
                let soc = self.val(VarKey::new(VarRole::Soc, t).b(b));
                if t > self.scope.k_start {
                    self.check_ge(&format!("soc_corridor[t={t},b={b}]"), soc, ess.soc_lower_kwh());
                    self.check_le(&format!("soc_corridor[t={t},b={b}]"), soc, ess.soc_upper_kwh());
                }
                let boundary = (t == 0 || t == horizon) && !(level2 && t == self.scope.k_start);
                if boundary && (soc - ess.soc_boundary_kwh()).abs() > 1e-9 {
                    self.flag(
                        format!("soc_boundary[t={t},b={b}]"),
                        format!("{soc} must equal {}", ess.soc_boundary_kwh()),
                    );
                }
            }
            for (i, zone) in cfg.buildings[b].zones.iter().enumerate() {
                for t in (self.scope.k_start + 1)..=self.scope.k_end {
                    let temp = self.val(VarKey::new(VarRole::IndoorTemp, t).b(b).i(i));
                    self.check_ge(&format!("temp_band[t={t},b={b},i={i}]"), temp, zone.temp_min_c);
                    self.check_le(&format!("temp_band[t={t},b={b},i={i}]"), temp, zone.temp_max_c);
                }
            }
        }
    }
}

/// Re-checks every constraint family of a schedule within `tol`.
/// Returns an empty list when the schedule is consistent.
pub fn audit_schedule(scope: &AuditScope<'_>, schedule: &Schedule, tol: f64) -> Vec<Violation> {
    let mut audit = Audit {
        scope,
        schedule,
        tol,
        out: Vec::new(),
    };
    audit.run();
    audit.out
}
