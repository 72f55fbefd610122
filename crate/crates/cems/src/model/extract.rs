//! Typed schedules recovered from solver solutions.

use super::{ModelError, VarKey, VarMap, VarRole};
use crate::lpcore::{Solution, SolveStatus};
use std::collections::BTreeMap;

/// A solved schedule: the inverse of the variable map, with binaries
/// rounded to exactly {0, 1}. Roles absent from the underlying problem
/// (for example community grid columns in per-building mode) are simply
/// missing, not zero.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub values: BTreeMap<VarKey, f64>,
    pub objective_value: f64,
    pub mip_gap: f64,
}

impl Schedule {
    pub fn get(&self, key: &VarKey) -> Option<f64> {
        self.values.get(key).copied()
    }

    /// Value of a fully-specified variable, defaulting absent slack-like
    /// roles is the caller's business — this panics on absent keys.
    pub fn require(&self, key: &VarKey) -> f64 {
        *self
            .values
            .get(key)
            .unwrap_or_else(|| panic!("schedule has no value for {key}"))
    }

    /// Time series of one role (building/zone/scenario fixed), or `None`
    /// when the role is absent from this schedule entirely.
    pub fn series(
        &self,
        role: VarRole,
        b: Option<usize>,
        i: Option<usize>,
        s: Option<usize>,
        t_range: std::ops::Range<usize>,
    ) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(t_range.len());
        for t in t_range {
            let key = VarKey { role, t, b, i, s };
            out.push(self.get(&key)?);
        }
        Some(out)
    }

    /// Whether any variable of this role exists in the schedule.
    pub fn has_role(&self, role: VarRole) -> bool {
        self.values.keys().any(|k| k.role == role)
    }
}

/// Inverts the variable map over an optimal solution.
pub fn extract_schedule(sol: &Solution, vmap: &VarMap) -> Result<Schedule, ModelError> {
    if sol.status != SolveStatus::Optimal {
        return Err(ModelError::NotOptimal(sol.status));
    }
    let mut values = BTreeMap::new();
    for (key, &idx) in vmap.iter() {
        let mut v = sol.primal[idx];
        if matches!(key.role, VarRole::ChargeOn | VarRole::DischargeOn) {
            v = if v >= 0.5 { 1.0 } else { 0.0 };
        }
        values.insert(*key, v);
    }
    Ok(Schedule {
        values,
        objective_value: sol.objective_value,
        mip_gap: sol.mip_gap,
    })
}
