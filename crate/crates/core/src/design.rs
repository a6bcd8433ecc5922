//! Effective sample size, two-stage sample-size re-estimation and decision rules.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{self, mean, variance, McmcConfig, Method, ModelSettings, PosteriorDraws};
use crate::model::Dataset;
use crate::rng::{stream, tag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub n_max: u32,
    pub n_stage1: u32,
    pub p_min: f64,
    pub p_max: f64,
    pub delta0: f64,
    pub q_positive: f64,
    pub q_clinical: f64,
}

impl DesignConfig {
    /// Defaults for a given planned control size: half of it in Stage 1.
    pub fn with_n_max(n_max: u32) -> Self {
        DesignConfig {
            n_max,
            n_stage1: n_max / 2,
            p_min: 0.75,
            p_max: 1.25,
            delta0: 0.2,
            q_positive: 0.05,
            q_clinical: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.n_stage1 == 0 || self.n_stage1 > self.n_max {
            return fail(format!(
                "need 0 < n_stage1 <= n_max, got n_stage1 = {}, n_max = {}",
                self.n_stage1, self.n_max
            ));
        }
        if !(0.0..=1.0).contains(&self.p_min) || !(self.p_max >= 1.0 && self.p_max.is_finite()) {
            return fail(format!("need 0 <= p_min <= 1 <= p_max, got {} and {}", self.p_min, self.p_max));
        }
        if !(0.0..1.0).contains(&self.delta0) {
            return fail(format!("delta0 must be in [0, 1), got {}", self.delta0));
        }
        for (name, q) in [("q_positive", self.q_positive), ("q_clinical", self.q_clinical)] {
            if !(q > 0.0 && q < 1.0) {
                return fail(format!("{name} must be in (0, 1), got {q}"));
            }
        }
        Ok(())
    }

    /// Smallest and largest allowed total control size.
    pub fn total_bounds(&self) -> (u32, u32) {
        let n = f64::from(self.n_max);
        let lo = (self.p_min * n).ceil() as u32;
        let hi = (self.p_max * n).floor() as u32;
        (lo.max(self.n_stage1), hi.max(self.n_stage1))
    }
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig::with_n_max(200)
    }
}

/// Treatment-arm data. Unlike a control outcome, an empty arm is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreatmentSummary {
    pub y: u32,
    pub n: u32,
}

impl TreatmentSummary {
    pub fn new(y: u32, n: u32) -> Result<Self> {
        if y > n {
            return Err(Error::InvalidDataset(format!("treatment responders {y} exceed size {n}")));
        }
        Ok(TreatmentSummary { y, n })
    }
}

/// Moment-matched effective sample size net of `n_current`: `m(1-m)/v - 1 - n_current`.
pub fn ess_moment_match(draws: &PosteriorDraws, n_current: u32) -> Result<f64> {
    ess_from_values(&draws.psi_new, n_current)
}

pub fn ess_from_values(values: &[f64], n_current: u32) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Degenerate("no draws".into()));
    }
    let m = mean(values);
    let v = variance(values);
    // rounding leaves a tiny positive variance for constant draws
    if !(v > 1e-14 * m * (1.0 - m)) {
        return Err(Error::Degenerate("posterior draws have zero variance".into()));
    }
    Ok(m * (1.0 - m) / v - 1.0 - f64::from(n_current))
}

/// Stage-2 control size; the total is clamped to `[p_min, p_max] * n_max`.
pub fn stage2_size(ess: f64, dc: &DesignConfig) -> u32 {
    let (lo, hi) = dc.total_bounds();
    let (lo, hi) = (i64::from(lo), i64::from(hi));
    let total = if ess.is_nan() {
        i64::from(dc.n_max)
    } else {
        // saturating float-to-int conversion handles the infinities
        let raw = f64::from(dc.n_max) - ess.round();
        (raw as i64).clamp(lo, hi)
    };
    (total - i64::from(dc.n_stage1)).max(0) as u32
}

/// Conjugate update of the `Beta(0.5, 0.5)` treatment-arm prior.
pub fn treatment_posterior(t: TreatmentSummary) -> (f64, f64) {
    (0.5 + f64::from(t.y), 0.5 + f64::from(t.n - t.y))
}

/// `psi_trt - psi_ctl` draws; control draws are paired by index, or resampled
/// with replacement when `n_draws` differs from their count.
pub fn effect_draws(control: &PosteriorDraws, t: TreatmentSummary, n_draws: usize, seed: u64) -> Result<Vec<f64>> {
    if control.is_empty() {
        return Err(Error::Degenerate("no control draws".into()));
    }
    let (a, b) = treatment_posterior(t);
    let beta = Beta::new(a, b).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = stream(seed, &[tag::EFFECT]);
    let ctl = &control.psi_new;
    let resample = n_draws != ctl.len();
    Ok((0..n_draws)
        .map(|i| {
            let c = if resample { ctl[rng.random_range(0..ctl.len())] } else { ctl[i] };
            beta.sample(&mut rng) - c
        })
        .collect())
}

/// True iff the fraction of draws above `margin` is at least `1 - q`.
pub fn decide(delta_draws: &[f64], margin: f64, q: f64) -> Result<bool> {
    Ok(posterior_exceedance(delta_draws, margin)? >= 1.0 - q)
}

pub fn posterior_exceedance(delta_draws: &[f64], margin: f64) -> Result<f64> {
    if delta_draws.is_empty() {
        return Err(Error::Degenerate("no effect draws".into()));
    }
    let above = delta_draws.iter().filter(|d| **d > margin).count();
    Ok(above as f64 / delta_draws.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterimPlan {
    pub ess: f64,
    pub n_stage1: u32,
    pub n_stage2: u32,
    pub total: u32,
}

/// Fit on historical plus Stage-1 data and size Stage 2.
pub fn run_adaptive_trial(
    interim: &Dataset,
    method: Method,
    settings: &ModelSettings,
    dc: &DesignConfig,
    mc: &McmcConfig,
) -> Result<(InterimPlan, PosteriorDraws)> {
    dc.validate()?;
    let stage1 = interim.outcome()?;
    if stage1.n != dc.n_stage1 {
        return Err(Error::InvalidDataset(format!(
            "interim data has {} patients but the design expects {}",
            stage1.n, dc.n_stage1
        )));
    }
    let draws = inference::fit(method, interim, settings, mc)?;
    let ess = ess_moment_match(&draws, dc.n_stage1)?;
    let n_stage2 = stage2_size(ess, dc);
    Ok((
        InterimPlan {
            ess,
            n_stage1: dc.n_stage1,
            n_stage2,
            total: dc.n_stage1 + n_stage2,
        },
        draws,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub p_positive: f64,
    pub p_clinical: f64,
    pub positive: bool,
    pub clinical: bool,
}

/// Both decision rules for one treatment arm against fitted control draws.
pub fn decide_trial(control: &PosteriorDraws, t: TreatmentSummary, dc: &DesignConfig, seed: u64) -> Result<Decision> {
    let delta = effect_draws(control, t, control.len(), seed)?;
    let p_positive = posterior_exceedance(&delta, 0.0)?;
    let p_clinical = posterior_exceedance(&delta, dc.delta0)?;
    Ok(Decision {
        p_positive,
        p_clinical,
        positive: p_positive >= 1.0 - dc.q_positive,
        clinical: p_clinical >= 1.0 - dc.q_clinical,
    })
}

/// Final analysis on the complete control data.
pub fn complete_trial(
    full: &Dataset,
    method: Method,
    settings: &ModelSettings,
    dc: &DesignConfig,
    mc: &McmcConfig,
    treatment: TreatmentSummary,
    seed: u64,
) -> Result<(Decision, PosteriorDraws)> {
    let draws = inference::fit(method, full, settings, mc)?;
    let decision = decide_trial(&draws, treatment, dc, seed)?;
    Ok((decision, draws))
}
