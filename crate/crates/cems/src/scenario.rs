//! Weighted PV-irradiance scenario sets: day-ahead generation and hourly
//! conditional updates.
//!
//! Deviations from clear sky follow a stationary Gaussian process with
//! exponential temporal correlation (an AR(1) recursion), truncated so
//! no trajectory exceeds clear sky or drops below zero. Conditioning on
//! observed generation keeps the history verbatim and decays the last
//! observed deviation into the future at the correlation scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Scenario-model parameters plus the deterministic seed all draws flow
/// from.
#[derive(Debug, Clone, Copy)]
pub struct CovModel {
    /// Per-step deviation std as a fraction of clear sky.
    pub marginal_std: f64,
    /// Temporal correlation scale, hours.
    pub corr_length_hours: f64,
    pub seed: u64,
}

/// A weighted set of irradiance trajectories sharing one clear-sky
/// envelope. Scenarios agree on all steps before `anchor_step`.
#[derive(Debug, Clone)]
pub struct ScenarioSet {
    /// `[s][t]` irradiance in W/m².
    pub scenarios: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub anchor_step: usize,
    pub clear_sky: Vec<f64>,
    pub step_hours: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("scenario count must be at least 1")]
    EmptySet,
    #[error("update step {step} beyond horizon {horizon}")]
    StepBeyondHorizon { step: usize, horizon: usize },
    #[error("observations cover {got} steps, need {need}")]
    ShortObservation { got: usize, need: usize },
    #[error("malformed scenario csv: {0}")]
    Csv(String),
}

/// Standard normal via Box-Muller on the raw ChaCha stream; keeps the
/// draw sequence fully pinned by this crate.
fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    // (0, 1] uniforms so the log is finite.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn stream_rng(seed: u64, anchor: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (anchor as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn draw(
    clear_sky: &[f64],
    step_hours: f64,
    cov: &CovModel,
    s_count: usize,
    anchor: usize,
    observed: &[f64],
) -> ScenarioSet {
    let horizon = clear_sky.len();
    let rho = (-step_hours / cov.corr_length_hours).exp();
    let innovation = (1.0 - rho * rho).sqrt();
    let last_dev = if anchor > 0 && clear_sky[anchor - 1] > 0.0 {
        observed[anchor - 1] / clear_sky[anchor - 1] - 1.0
    } else {
        0.0
    };
    let mut rng = stream_rng(cov.seed, anchor);

    let mut scenarios = Vec::with_capacity(s_count);
    for _ in 0..s_count {
        let mut series = Vec::with_capacity(horizon);
        let mut zeta;
        let mut mean_dev;
        if anchor == 0 {
            // Unconditional: stationary start.
            zeta = std_normal(&mut rng);
            mean_dev = 0.0;
        } else {
            // Conditional: zero innovation at the last observed step.
            zeta = 0.0;
            mean_dev = last_dev;
        }
        for (t, &cs) in clear_sky.iter().enumerate() {
            if t < anchor {
                series.push(observed[t]);
                continue;
            }
            if !(anchor == 0 && t == 0) {
                zeta = rho * zeta + innovation * std_normal(&mut rng);
                mean_dev *= rho;
            }
            if cs == 0.0 {
                series.push(0.0);
                continue;
            }
            let dev = mean_dev + cov.marginal_std * zeta;
            series.push((cs * (1.0 + dev)).clamp(0.0, cs));
        }
        scenarios.push(series);
    }

    ScenarioSet {
        scenarios,
        weights: vec![1.0 / s_count as f64; s_count],
        anchor_step: anchor,
        clear_sky: clear_sky.to_vec(),
        step_hours,
    }
}

/// Draws `s_count` day-ahead trajectories with uniform weights.
pub fn generate_day_ahead(
    clear_sky: &[f64],
    step_hours: f64,
    cov: &CovModel,
    s_count: usize,
) -> Result<ScenarioSet, ScenarioError> {
    if s_count == 0 {
        return Err(ScenarioError::EmptySet);
    }
    Ok(draw(clear_sky, step_hours, cov, s_count, 0, &[]))
}

/// Index of the most probable scenario: maximal weight, ties broken by
/// smallest Euclidean distance to the weighted per-step mean, then by
/// lowest index.
pub fn most_probable(set: &ScenarioSet) -> usize {
    let s_count = set.scenarios.len();
    let horizon = set.clear_sky.len();
    let max_w = set.weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let candidates: Vec<usize> = (0..s_count)
        .filter(|&s| set.weights[s] >= max_w - 1e-15)
        .collect();
    if candidates.len() == 1 {
        return candidates[0];
    }
    let mut mean = vec![0.0; horizon];
    for s in 0..s_count {
        for t in 0..horizon {
            mean[t] += set.weights[s] * set.scenarios[s][t];
        }
    }
    let mut best = candidates[0];
    let mut best_d = f64::INFINITY;
    for &s in &candidates {
        let d: f64 = (0..horizon)
            .map(|t| (set.scenarios[s][t] - mean[t]).powi(2))
            .sum();
        if d < best_d - 1e-15 {
            best_d = d;
            best = s;
        }
    }
    best
}

/// Re-draws the set conditioned on generation observed through step
/// `k` (exclusive). History becomes the observations verbatim; future
/// deviations decay from the last observed one; weights reset uniform.
pub fn update_hourly(
    set: &ScenarioSet,
    cov: &CovModel,
    k: usize,
    observed: &[f64],
) -> Result<ScenarioSet, ScenarioError> {
    let horizon = set.clear_sky.len();
    if k > horizon {
        return Err(ScenarioError::StepBeyondHorizon {
            step: k,
            horizon,
        });
    }
    if observed.len() < k {
        return Err(ScenarioError::ShortObservation {
            got: observed.len(),
            need: k,
        });
    }
    Ok(draw(
        &set.clear_sky,
        set.step_hours,
        cov,
        set.scenarios.len(),
        k,
        &observed[..k],
    ))
}

/// Serializes a set as `t,s,irradiance_wm2` rows.
pub fn to_csv(set: &ScenarioSet) -> String {
    let mut out = String::from("t,s,irradiance_wm2\n");
    for (s, series) in set.scenarios.iter().enumerate() {
        for (t, v) in series.iter().enumerate() {
            out.push_str(&format!("{t},{s},{v}\n"));
        }
    }
    out
}

/// Parses a `t,s,irradiance_wm2` document into a uniform-weight set
/// anchored at 0, against the given clear-sky envelope.
pub fn from_csv(
    text: &str,
    clear_sky: &[f64],
    step_hours: f64,
) -> Result<ScenarioSet, ScenarioError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().trim();
    if header != "t,s,irradiance_wm2" {
        return Err(ScenarioError::Csv(format!("bad header {header:?}")));
    }
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(ScenarioError::Csv(format!("line {}: need 3 fields", lineno + 2)));
        }
        let t: usize = parts[0]
            .trim()
            .parse()
            .map_err(|e| ScenarioError::Csv(format!("line {}: {e}", lineno + 2)))?;
        let s: usize = parts[1]
            .trim()
            .parse()
            .map_err(|e| ScenarioError::Csv(format!("line {}: {e}", lineno + 2)))?;
        let v: f64 = parts[2]
            .trim()
            .parse()
            .map_err(|e| ScenarioError::Csv(format!("line {}: {e}", lineno + 2)))?;
        cells.push((t, s, v));
    }
    if cells.is_empty() {
        return Err(ScenarioError::EmptySet);
    }
    let s_count = cells.iter().map(|&(_, s, _)| s).max().unwrap() + 1;
    let horizon = clear_sky.len();
    let mut scenarios = vec![vec![f64::NAN; horizon]; s_count];
    for (t, s, v) in cells {
        if t >= horizon {
            return Err(ScenarioError::Csv(format!("step {t} beyond horizon {horizon}")));
        }
        scenarios[s][t] = v;
    }
    for (s, series) in scenarios.iter().enumerate() {
        if series.iter().any(|v| v.is_nan()) {
            return Err(ScenarioError::Csv(format!("scenario {s} has missing steps")));
        }
    }
    Ok(ScenarioSet {
        weights: vec![1.0 / s_count as f64; s_count],
        scenarios,
        anchor_step: 0,
        clear_sky: clear_sky.to_vec(),
        step_hours,
    })
}
