//! Forward sampling from the priors, used to validate the MCMC kernels.

use rand::Rng;

use super::rmap::{RmapParams, RmapState};
use super::sampling::{categorical, cauchy, half_cauchy, logistic, logit_beta, normal};
use crate::error::Result;
use crate::model::{borrow_weights, weighted_mean, Dataset, Expert, ParameterState, SpxHyperParams};

/// One joint draw of every SPx parameter from the prior given the covariates.
pub fn sample_spx_prior<R: Rng + ?Sized>(dataset: &Dataset, hp: &SpxHyperParams, rng: &mut R) -> Result<ParameterState> {
    let beta: Vec<f64> = (0..dataset.dim()).map(|_| cauchy(rng, hp.beta_scale)).collect();
    let tau = half_cauchy(rng, hp.tau_scale);
    let sigma = half_cauchy(rng, hp.sigma_scale);
    let theta_trials: Vec<f64> = dataset
        .historical
        .iter()
        .map(|t| normal(rng, crate::model::weights::dot(&beta, &t.x), tau))
        .collect();
    let w = borrow_weights(&beta, dataset, hp)?;
    let mu_hist = weighted_mean(&w, &theta_trials)?;
    let pred_new = crate::model::weights::dot(&beta, &dataset.new_trial.x);
    let theta_hist = normal(rng, mu_hist, sigma);
    let theta_reg = normal(rng, pred_new, hp.c.sqrt() * tau);
    let theta_ind = logit_beta(rng, 0.5, 0.5);
    let z = Expert::from_index(categorical(rng, &hp.prior_probs()));
    Ok(ParameterState {
        theta_trials,
        beta,
        tau,
        sigma,
        theta_hist,
        theta_reg,
        theta_ind,
        z,
    })
}

pub fn sample_rmap_prior<R: Rng + ?Sized>(n_hist: usize, rp: &RmapParams, rng: &mut R) -> RmapState {
    let mu = normal(rng, 0.0, rp.mu_prior_sd);
    let tau = half_cauchy(rng, rp.tau_prior_scale);
    let theta_trials = (0..n_hist).map(|_| normal(rng, mu, tau)).collect();
    let theta_map = normal(rng, mu, tau);
    let theta_rob = logistic(rng);
    let map_selected = rng.random::<f64>() < rp.mix_weight;
    RmapState {
        theta_trials,
        mu,
        tau,
        theta_map,
        theta_rob,
        map_selected,
    }
}
