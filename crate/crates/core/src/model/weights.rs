//! Covariate-distance kernel for the direct-borrowing expert.

use serde::{Deserialize, Serialize};

use super::link::inv_logit;
use super::types::{Dataset, SpxHyperParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorrowWeights {
    /// Normalized weight of each historical trial.
    pub w: Vec<f64>,
    /// Predicted rates `inv_logit(beta' x_h)`; the last entry is the new trial.
    pub pi_tilde: Vec<f64>,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn borrow_weights(beta: &[f64], dataset: &Dataset, hp: &SpxHyperParams) -> Result<BorrowWeights> {
    if beta.len() != dataset.dim() {
        return Err(Error::Domain(format!(
            "beta has length {}, covariates have dimension {}",
            beta.len(),
            dataset.dim()
        )));
    }
    if dataset.historical.is_empty() {
        return Err(Error::InvalidDataset("no historical trials".into()));
    }
    let pi_tilde: Vec<f64> = dataset
        .historical
        .iter()
        .map(|t| &t.x)
        .chain(std::iter::once(&dataset.new_trial.x))
        .map(|x| inv_logit(dot(beta, x)))
        .collect();
    let mut w = vec![0.0; dataset.n_hist()];
    kernel_weights(&pi_tilde, hp, &mut w);
    Ok(BorrowWeights { w, pi_tilde })
}

/// Fill `w` from predicted rates (new trial last).
///
/// Works in log space, so the largest raw weight is exactly 1 before
/// normalization and the result cannot underflow to all zeros.
pub fn kernel_weights(pi_tilde: &[f64], hp: &SpxHyperParams, w: &mut [f64]) {
    let (hist, new) = pi_tilde.split_at(pi_tilde.len() - 1);
    let target = new[0];
    let slope = hp.w_base.ln() / hp.w_bandwidth;
    let mut max_lw = f64::NEG_INFINITY;
    for (wi, p) in w.iter_mut().zip(hist) {
        *wi = slope * (p - target).abs();
        max_lw = max_lw.max(*wi);
    }
    let mut total = 0.0;
    for wi in w.iter_mut() {
        *wi = (*wi - max_lw).exp();
        total += *wi;
    }
    for wi in w.iter_mut() {
        *wi /= total;
    }
}

pub fn weighted_mean(weights: &BorrowWeights, theta_trials: &[f64]) -> Result<f64> {
    if weights.w.len() != theta_trials.len() {
        return Err(Error::Domain(format!(
            "{} weights for {} trials",
            weights.w.len(),
            theta_trials.len()
        )));
    }
    Ok(dot(&weights.w, theta_trials))
}
