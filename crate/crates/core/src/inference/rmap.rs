//! Robust meta-analytic-predictive comparator.
//!
//! `theta_h ~ N(mu, tau^2)` for the historical trials; the new trial's logit
//! rate is the MAP component `N(mu, tau^2)` with probability `mix_weight` and
//! a vague `Logistic(0, 1)` component otherwise.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adapt::Proposal;
use super::config::McmcConfig;
use super::draws::{Diagnostics, PosteriorDraws};
use super::sampling::{categorical, logistic, logit_beta, normal, normalize_log};
use crate::error::{Error, Result};
use crate::model::density::{binomial_logit_lpmf, half_cauchy_lpdf, ln_choose, normal_lpdf};
use crate::model::{inv_logit, Dataset, Expert, Outcome};
use crate::rng::{stream, tag, SpxRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RmapParams {
    /// Prior probability of the MAP component.
    pub mix_weight: f64,
    pub mu_prior_sd: f64,
    pub tau_prior_scale: f64,
}

impl Default for RmapParams {
    fn default() -> Self {
        RmapParams {
            mix_weight: 0.5,
            mu_prior_sd: 10.0,
            tau_prior_scale: 1.0,
        }
    }
}

impl RmapParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mix_weight) {
            return Err(Error::InvalidConfig(format!(
                "mix_weight must be in [0, 1], got {}",
                self.mix_weight
            )));
        }
        for (name, v) in [("mu_prior_sd", self.mu_prior_sd), ("tau_prior_scale", self.tau_prior_scale)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// One RMAP state. The component labels reuse `Expert`: `Hist` is the MAP
/// component and `Ind` the robust one.
#[derive(Debug, Clone, PartialEq)]
pub struct RmapState {
    pub theta_trials: Vec<f64>,
    pub mu: f64,
    pub tau: f64,
    pub theta_map: f64,
    pub theta_rob: f64,
    pub map_selected: bool,
}

impl RmapState {
    pub fn theta_new(&self) -> f64 {
        if self.map_selected {
            self.theta_map
        } else {
            self.theta_rob
        }
    }
}

pub fn fit_rmap(dataset: &Dataset, rp: &RmapParams, mc: &McmcConfig) -> Result<PosteriorDraws> {
    dataset.validate()?;
    rp.validate()?;
    mc.validate()?;
    if mc.likelihood.new_trial() {
        dataset.outcome()?;
    }
    let prepared = Prepared::new(dataset, rp, mc);
    let chains: Vec<ChainOutput> = (0..mc.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(mc.seed, &[tag::CHAIN, c as u64]);
            let mut chain = Chain::new(&prepared, &mut rng);
            chain.run(&prepared, mc, &mut rng)
        })
        .collect();

    let mut psi = Vec::with_capacity(mc.total_draws());
    let mut z = Vec::with_capacity(mc.total_draws());
    let mut trace: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut rb = [0.0; 3];
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for c in chains {
        psi.extend(c.psi);
        z.extend(c.z);
        for (k, v) in c.trace {
            trace.entry(k).or_default().extend(v);
        }
        rb[0] += c.rb_map;
        rb[2] += c.rb_rob;
        for (k, (a, n)) in c.counts {
            let e = counts.entry(k).or_insert((0, 0));
            e.0 += a;
            e.1 += n;
        }
    }
    if psi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Runtime("sampler produced non-finite draws".into()));
    }
    let total = rb[0] + rb[2];
    Ok(PosteriorDraws {
        psi_new: psi,
        z_draws: z,
        rb_weights: rb.map(|v| v / total),
        full_params: None,
        trace: mc.keep_params.then_some(trace),
        diagnostics: Diagnostics::from_counts(mc.chains, &counts),
    })
}

struct Prepared {
    rp: RmapParams,
    h: usize,
    y: Vec<u32>,
    n: Vec<u32>,
    lchoose: Vec<f64>,
    info: Vec<f64>,
    hist_on: bool,
    outcome: Option<Outcome>,
    lchoose_new: f64,
    info_new: f64,
}

impl Prepared {
    fn new(dataset: &Dataset, rp: &RmapParams, mc: &McmcConfig) -> Self {
        let hist_on = mc.likelihood.historical();
        let outcome = if mc.likelihood.new_trial() {
            dataset.new_trial.outcome
        } else {
            None
        };
        let fisher = |y: u32, n: u32| {
            let p = (f64::from(y) + 0.5) / (f64::from(n) + 1.0);
            f64::from(n) * p * (1.0 - p)
        };
        Prepared {
            rp: *rp,
            h: dataset.n_hist(),
            y: dataset.historical.iter().map(|t| t.y).collect(),
            n: dataset.historical.iter().map(|t| t.n).collect(),
            lchoose: dataset.historical.iter().map(|t| ln_choose(t.n, t.y)).collect(),
            info: dataset
                .historical
                .iter()
                .map(|t| if hist_on { fisher(t.y, t.n) } else { 0.0 })
                .collect(),
            hist_on,
            outcome,
            lchoose_new: outcome.map_or(0.0, |o| ln_choose(o.n, o.y)),
            info_new: outcome.map_or(0.0, |o| fisher(o.y, o.n)),
        }
    }

    fn hist_lik(&self, h: usize, theta: f64) -> f64 {
        if self.hist_on {
            binomial_logit_lpmf(self.y[h], self.n[h], theta, self.lchoose[h])
        } else {
            0.0
        }
    }

    fn new_lik(&self, theta: f64) -> f64 {
        match self.outcome {
            Some(o) => binomial_logit_lpmf(o.y, o.n, theta, self.lchoose_new),
            None => 0.0,
        }
    }
}

struct Chain {
    s: RmapState,
    lik: Vec<f64>,
    theta_buf: Vec<f64>,
    lik_buf: Vec<f64>,
}

struct ChainOutput {
    psi: Vec<f64>,
    z: Vec<Expert>,
    trace: BTreeMap<String, Vec<f64>>,
    rb_map: f64,
    rb_rob: f64,
    counts: BTreeMap<String, (u64, u64)>,
}

struct Proposals {
    theta: Proposal,
    shift: Proposal,
    tau: Proposal,
    rescale: Proposal,
    map: Proposal,
}

fn accept(rng: &mut SpxRng, log_alpha: f64) -> bool {
    log_alpha >= 0.0 || rng.random::<f64>().ln() < log_alpha
}

impl Chain {
    fn new(p: &Prepared, rng: &mut SpxRng) -> Self {
        let theta_trials: Vec<f64> = (0..p.h)
            .map(|h| {
                let base = if p.hist_on {
                    ((f64::from(p.y[h]) + 0.5) / (f64::from(p.n[h] - p.y[h]) + 0.5)).ln()
                } else {
                    0.0
                };
                base + normal(rng, 0.0, 0.1)
            })
            .collect();
        let mu = theta_trials.iter().sum::<f64>() / p.h as f64;
        let lik = (0..p.h).map(|h| p.hist_lik(h, theta_trials[h])).collect();
        Chain {
            s: RmapState {
                theta_trials,
                mu,
                tau: 0.5,
                theta_map: mu,
                theta_rob: 0.0,
                map_selected: p.rp.mix_weight > 0.0,
            },
            lik,
            theta_buf: vec![0.0; p.h],
            lik_buf: vec![0.0; p.h],
        }
    }

    fn run(&mut self, p: &Prepared, mc: &McmcConfig, rng: &mut SpxRng) -> ChainOutput {
        let st = &mc.step_sizes;
        let mut props = Proposals {
            theta: Proposal::new(st.theta),
            shift: Proposal::new(st.beta),
            tau: Proposal::new(st.log_tau),
            rescale: Proposal::new(st.log_tau),
            map: Proposal::new(st.theta_hist),
        };
        let mut out = ChainOutput {
            psi: Vec::with_capacity(mc.samples),
            z: Vec::with_capacity(mc.samples),
            trace: BTreeMap::new(),
            rb_map: 0.0,
            rb_rob: 0.0,
            counts: BTreeMap::new(),
        };
        let total = mc.burn_in + mc.samples * mc.thin;
        for it in 0..total {
            let adapt = (mc.adapt_burnin && it < mc.burn_in).then_some(it);
            let q_map = self.sweep(p, rng, &mut props, adapt);
            if it >= mc.burn_in {
                out.rb_map += q_map;
                out.rb_rob += 1.0 - q_map;
                if (it - mc.burn_in + 1).is_multiple_of(mc.thin) {
                    out.psi.push(inv_logit(self.s.theta_new()));
                    out.z.push(if self.s.map_selected { Expert::Hist } else { Expert::Ind });
                    if mc.keep_params {
                        out.trace.entry("mu".into()).or_default().push(self.s.mu);
                        out.trace.entry("tau".into()).or_default().push(self.s.tau);
                    }
                }
            }
        }
        for (name, prop) in [
            ("theta", &props.theta),
            ("mu_shift", &props.shift),
            ("log_tau", &props.tau),
            ("tau_rescale", &props.rescale),
            ("theta_map", &props.map),
        ] {
            out.counts.insert(name.to_string(), prop.counts());
        }
        out
    }

    /// One scan; returns the conditional probability of the MAP component.
    fn sweep(&mut self, p: &Prepared, rng: &mut SpxRng, props: &mut Proposals, adapt: Option<usize>) -> f64 {
        for h in 0..p.h {
            self.move_theta(p, h, rng, &mut props.theta, adapt);
        }
        self.gibbs_mu(p, rng);
        self.shift_mu(p, rng, &mut props.shift, adapt);
        self.move_tau(p, rng, &mut props.tau, adapt);
        self.rescale_tau(p, rng, &mut props.rescale, adapt);
        if self.s.map_selected {
            self.move_map(p, rng, &mut props.map, adapt);
            self.s.theta_rob = logistic(rng);
        } else {
            self.s.theta_map = normal(rng, self.s.mu, self.s.tau);
            self.s.theta_rob = match p.outcome {
                Some(o) => logit_beta(rng, 1.0 + f64::from(o.y), 1.0 + f64::from(o.n - o.y)),
                None => logistic(rng),
            };
        }
        let pi = p.rp.mix_weight;
        let q = normalize_log(&[
            pi.ln() + p.new_lik(self.s.theta_map),
            (1.0 - pi).ln() + p.new_lik(self.s.theta_rob),
        ]);
        self.s.map_selected = categorical(rng, &q) == 0;
        q[0]
    }

    fn map_live(&self) -> bool {
        self.s.map_selected
    }

    fn move_theta(&mut self, p: &Prepared, h: usize, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        let tau = self.s.tau;
        let sd = prop.scale() / (1.0 / (tau * tau) + p.info[h]).sqrt();
        let old = self.s.theta_trials[h];
        let new = normal(rng, old, sd);
        let lik_new = p.hist_lik(h, new);
        let log_alpha =
            lik_new - self.lik[h] + normal_lpdf(new, self.s.mu, tau) - normal_lpdf(old, self.s.mu, tau);
        let ok = accept(rng, log_alpha);
        if ok {
            self.s.theta_trials[h] = new;
            self.lik[h] = lik_new;
        }
        prop.record(log_alpha, ok, adapt);
    }

    fn gibbs_mu(&mut self, p: &Prepared, rng: &mut SpxRng) {
        let tau2 = self.s.tau * self.s.tau;
        let mut sum: f64 = self.s.theta_trials.iter().sum();
        let mut m = p.h as f64;
        if self.map_live() {
            sum += self.s.theta_map;
            m += 1.0;
        }
        let prec = 1.0 / p.rp.mu_prior_sd.powi(2) + m / tau2;
        self.s.mu = normal(rng, sum / tau2 / prec, prec.sqrt().recip());
    }

    /// Translate `mu` and every random effect it governs.
    fn shift_mu(&mut self, p: &Prepared, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        let eps = normal(rng, 0.0, prop.scale());
        let new_mu = self.s.mu + eps;
        let mut log_alpha = normal_lpdf(new_mu, 0.0, p.rp.mu_prior_sd) - normal_lpdf(self.s.mu, 0.0, p.rp.mu_prior_sd);
        for h in 0..p.h {
            self.theta_buf[h] = self.s.theta_trials[h] + eps;
            self.lik_buf[h] = p.hist_lik(h, self.theta_buf[h]);
            log_alpha += self.lik_buf[h] - self.lik[h];
        }
        if self.map_live() {
            log_alpha += p.new_lik(self.s.theta_map + eps) - p.new_lik(self.s.theta_map);
        }
        let ok = accept(rng, log_alpha);
        if ok {
            self.s.mu = new_mu;
            std::mem::swap(&mut self.s.theta_trials, &mut self.theta_buf);
            std::mem::swap(&mut self.lik, &mut self.lik_buf);
            if self.map_live() {
                self.s.theta_map += eps;
            }
        }
        prop.record(log_alpha, ok, adapt);
    }

    fn move_tau(&mut self, p: &Prepared, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        let eps = normal(rng, 0.0, prop.scale());
        let old = self.s.tau;
        let new = old * eps.exp();
        let mut log_alpha =
            eps + half_cauchy_lpdf(new, p.rp.tau_prior_scale) - half_cauchy_lpdf(old, p.rp.tau_prior_scale);
        for t in &self.s.theta_trials {
            log_alpha += normal_lpdf(*t, self.s.mu, new) - normal_lpdf(*t, self.s.mu, old);
        }
        if self.map_live() {
            let t = self.s.theta_map;
            log_alpha += normal_lpdf(t, self.s.mu, new) - normal_lpdf(t, self.s.mu, old);
        }
        let ok = new.is_finite() && new > 0.0 && accept(rng, log_alpha);
        if ok {
            self.s.tau = new;
        }
        prop.record(log_alpha, ok, adapt);
    }

    fn rescale_tau(&mut self, p: &Prepared, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        let eps = normal(rng, 0.0, prop.scale());
        let r = eps.exp();
        let new_tau = self.s.tau * r;
        if !(new_tau.is_finite() && new_tau > 0.0) {
            prop.record(f64::NEG_INFINITY, false, adapt);
            return;
        }
        let mu = self.s.mu;
        let mut log_alpha =
            eps + half_cauchy_lpdf(new_tau, p.rp.tau_prior_scale) - half_cauchy_lpdf(self.s.tau, p.rp.tau_prior_scale);
        for h in 0..p.h {
            self.theta_buf[h] = mu + r * (self.s.theta_trials[h] - mu);
            self.lik_buf[h] = p.hist_lik(h, self.theta_buf[h]);
            log_alpha += self.lik_buf[h] - self.lik[h];
        }
        let map_new = mu + r * (self.s.theta_map - mu);
        if self.map_live() {
            log_alpha += p.new_lik(map_new) - p.new_lik(self.s.theta_map);
        }
        let ok = log_alpha.is_finite() && accept(rng, log_alpha);
        if ok {
            self.s.tau = new_tau;
            std::mem::swap(&mut self.s.theta_trials, &mut self.theta_buf);
            std::mem::swap(&mut self.lik, &mut self.lik_buf);
            if self.map_live() {
                self.s.theta_map = map_new;
            }
        }
        prop.record(log_alpha, ok, adapt);
    }

    fn move_map(&mut self, p: &Prepared, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        let tau = self.s.tau;
        let sd = prop.scale() / (1.0 / (tau * tau) + p.info_new).sqrt();
        let old = self.s.theta_map;
        let new = normal(rng, old, sd);
        let log_alpha = normal_lpdf(new, self.s.mu, tau) - normal_lpdf(old, self.s.mu, tau) + p.new_lik(new)
            - p.new_lik(old);
        let ok = accept(rng, log_alpha);
        if ok {
            self.s.theta_map = new;
        }
        prop.record(log_alpha, ok, adapt);
    }
}
