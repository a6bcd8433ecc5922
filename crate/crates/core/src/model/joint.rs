//! Unnormalized log posterior of the full SPx hierarchy.

use serde::Serialize;

use super::density::{
    binomial_logit_lpmf, cauchy_lpdf, half_cauchy_lpdf, jeffreys_logit_lpdf, ln_choose, normal_lpdf,
};
use super::types::{Dataset, Expert, LikelihoodMode, ParameterState, SpxHyperParams};
use super::weights::{borrow_weights, dot, weighted_mean};
use crate::error::{Error, Result};

/// Individual additive terms of the joint log-density.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct JointTerms {
    pub hist_likelihood: f64,
    pub trial_prior: f64,
    pub hist_expert: f64,
    pub reg_expert: f64,
    pub ind_expert: f64,
    pub sigma_prior: f64,
    pub tau_prior: f64,
    pub beta_prior: f64,
    pub z_prior: f64,
    pub new_likelihood: f64,
}

impl JointTerms {
    pub fn total(&self) -> f64 {
        self.hist_likelihood
            + self.trial_prior
            + self.hist_expert
            + self.reg_expert
            + self.ind_expert
            + self.sigma_prior
            + self.tau_prior
            + self.beta_prior
            + self.z_prior
            + self.new_likelihood
    }
}

pub fn log_joint(state: &ParameterState, dataset: &Dataset, hp: &SpxHyperParams) -> Result<f64> {
    Ok(joint_terms(state, dataset, hp, LikelihoodMode::Full)?.total())
}

pub fn log_joint_with(
    state: &ParameterState,
    dataset: &Dataset,
    hp: &SpxHyperParams,
    mode: LikelihoodMode,
) -> Result<f64> {
    Ok(joint_terms(state, dataset, hp, mode)?.total())
}

/// Term-by-term evaluation. Out-of-support scales put `-inf` in the affected terms.
pub fn joint_terms(
    state: &ParameterState,
    dataset: &Dataset,
    hp: &SpxHyperParams,
    mode: LikelihoodMode,
) -> Result<JointTerms> {
    dataset.validate()?;
    if state.theta_trials.len() != dataset.n_hist() || state.beta.len() != dataset.dim() {
        return Err(Error::Domain("parameter state does not match dataset dimensions".into()));
    }
    let outcome = if mode.new_trial() {
        Some(dataset.outcome()?)
    } else {
        None
    };
    let mut t = JointTerms::default();
    if state.tau <= 0.0 || state.sigma <= 0.0 {
        t.tau_prior = f64::NEG_INFINITY;
        return Ok(t);
    }

    for (trial, &theta) in dataset.historical.iter().zip(&state.theta_trials) {
        if mode.historical() {
            t.hist_likelihood += binomial_logit_lpmf(trial.y, trial.n, theta, ln_choose(trial.n, trial.y));
        }
        t.trial_prior += normal_lpdf(theta, dot(&state.beta, &trial.x), state.tau);
    }

    let weights = borrow_weights(&state.beta, dataset, hp)?;
    let mu_hist = weighted_mean(&weights, &state.theta_trials)?;
    t.hist_expert = normal_lpdf(state.theta_hist, mu_hist, state.sigma);
    t.reg_expert = normal_lpdf(
        state.theta_reg,
        dot(&state.beta, &dataset.new_trial.x),
        hp.c.sqrt() * state.tau,
    );
    t.ind_expert = jeffreys_logit_lpdf(state.theta_ind);
    t.sigma_prior = half_cauchy_lpdf(state.sigma, hp.sigma_scale);
    t.tau_prior = half_cauchy_lpdf(state.tau, hp.tau_scale);
    t.beta_prior = state.beta.iter().map(|&b| cauchy_lpdf(b, hp.beta_scale)).sum();
    t.z_prior = hp.prior_probs()[state.z.index()].ln();
    if let Some(o) = outcome {
        t.new_likelihood = binomial_logit_lpmf(o.y, o.n, state.theta_new(), ln_choose(o.n, o.y));
    }
    Ok(t)
}

/// Log prior density of one expert's parameter given the rest of the state.
pub fn expert_prior(state: &ParameterState, dataset: &Dataset, hp: &SpxHyperParams, k: Expert) -> Result<f64> {
    let t = joint_terms(state, dataset, hp, LikelihoodMode::PriorOnly)?;
    Ok(match k {
        Expert::Hist => t.hist_expert,
        Expert::Reg => t.reg_expert,
        Expert::Ind => t.ind_expert,
    })
}
