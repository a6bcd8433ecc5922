//! Metropolis-within-Gibbs sampler for the SPx hierarchy.
//!
//! All three expert parameters are instantiated. Blocks that do not involve
//! an unselected expert are updated with that expert integrated out (its
//! conditional prior integrates to one), and the unselected experts are then
//! redrawn exactly from their conditional priors before the selector update.
//! Moves that shift the mean of the selected expert carry the expert along,
//! so tight expert priors do not freeze the regression block.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::adapt::Proposal;
use super::config::McmcConfig;
use super::draws::{Diagnostics, PosteriorDraws};
use super::sampling::{categorical, half_cauchy, logit_beta, normal, normalize_log};
use crate::error::{Error, Result};
use crate::model::density::{binomial_logit_lpmf, cauchy_lpdf, half_cauchy_lpdf, ln_choose, normal_lpdf};
use crate::model::weights::{dot, kernel_weights};
use crate::model::{inv_logit, Dataset, Expert, NewTrial, Outcome, ParameterState, SpxHyperParams};
use crate::rng::{stream, tag, SpxRng};

/// Exact conditional probabilities of the selector given all expert parameters.
///
/// `q_k ∝ p_k Bin(y; n, inv_logit(theta_k))`, normalized in log space. Without
/// an outcome the conditional equals the prior.
pub fn z_conditional(thetas: [f64; 3], outcome: Option<Outcome>, prior: [f64; 3]) -> [f64; 3] {
    let mut log_w = [0.0; 3];
    for k in 0..3 {
        log_w[k] = prior[k].ln();
        if let Some(o) = outcome {
            if prior[k] > 0.0 {
                // binomial coefficient cancels across experts
                log_w[k] += binomial_logit_lpmf(o.y, o.n, thetas[k], 0.0);
            }
        }
    }
    let p = normalize_log(&log_w);
    [p[0], p[1], p[2]]
}

/// Draw the selector from its exact conditional; returns the draw and the probabilities.
pub fn update_z<R: Rng + ?Sized>(
    state: &ParameterState,
    new_trial: &NewTrial,
    hp: &SpxHyperParams,
    rng: &mut R,
) -> (Expert, [f64; 3]) {
    let q = z_conditional(state.expert_thetas(), new_trial.outcome, hp.prior_probs());
    (Expert::from_index(categorical(rng, &q)), q)
}

pub fn fit_spx(dataset: &Dataset, hp: &SpxHyperParams, mc: &McmcConfig) -> Result<PosteriorDraws> {
    dataset.validate()?;
    hp.validate()?;
    mc.validate()?;
    if mc.likelihood.new_trial() {
        dataset.outcome()?;
    }
    let prepared = Prepared::new(dataset, hp, mc);
    let chains: Vec<ChainOutput> = (0..mc.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(mc.seed, &[tag::CHAIN, c as u64]);
            let mut chain = Chain::new(&prepared, &mut rng);
            chain.run(&prepared, mc, &mut rng)
        })
        .collect();
    merge(chains, mc)
}

/// Data and constants shared by all chains.
struct Prepared {
    hp: SpxHyperParams,
    h: usize,
    d: usize,
    /// Row-major `h x d` historical covariates.
    x: Vec<f64>,
    x_new: Vec<f64>,
    y: Vec<u32>,
    n: Vec<u32>,
    lchoose: Vec<f64>,
    /// Approximate Fisher information of each historical logit rate.
    info: Vec<f64>,
    hist_on: bool,
    outcome: Option<Outcome>,
    lchoose_new: f64,
    info_new: f64,
    prior: [f64; 3],
    sqrt_c: f64,
}

impl Prepared {
    fn new(dataset: &Dataset, hp: &SpxHyperParams, mc: &McmcConfig) -> Self {
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
        let prior = hp.prior_probs();
        Prepared {
            hp: *hp,
            h: dataset.n_hist(),
            d: dataset.dim(),
            x: dataset.historical.iter().flat_map(|t| t.x.iter().copied()).collect(),
            x_new: dataset.new_trial.x.clone(),
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
            prior,
            sqrt_c: hp.c.sqrt(),
        }
    }

    fn row(&self, h: usize) -> &[f64] {
        &self.x[h * self.d..(h + 1) * self.d]
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

    fn predictions(&self, beta: &[f64], out: &mut [f64]) {
        for h in 0..self.h {
            out[h] = dot(beta, self.row(h));
        }
        out[self.h] = dot(beta, &self.x_new);
    }

    fn weights(&self, pred: &[f64], pi: &mut [f64], w: &mut [f64]) {
        for (p, l) in pi.iter_mut().zip(pred) {
            *p = inv_logit(*l);
        }
        kernel_weights(pi, &self.hp, w);
    }
}

#[derive(Clone, Copy)]
enum BetaMove {
    Centered,
    Shift,
    Scale,
}

struct Proposals {
    theta: Proposal,
    beta: Vec<[Proposal; 3]>,
    tau: Proposal,
    tau_rescale: Proposal,
    sigma: Proposal,
    hist: Proposal,
    reg: Proposal,
}

struct Chain {
    s: ParameterState,
    /// `beta' x_h` for the historical trials, then the new trial.
    pred: Vec<f64>,
    w: Vec<f64>,
    mu_hist: f64,
    lik: Vec<f64>,
    pred_buf: Vec<f64>,
    pi_buf: Vec<f64>,
    w_buf: Vec<f64>,
    theta_buf: Vec<f64>,
    lik_buf: Vec<f64>,
    props: Option<Proposals>,
}

struct ChainOutput {
    psi: Vec<f64>,
    z: Vec<Expert>,
    params: Vec<ParameterState>,
    rb_sum: [f64; 3],
    counts: BTreeMap<String, (u64, u64)>,
}

impl Chain {
    fn new(p: &Prepared, rng: &mut SpxRng) -> Self {
        let theta_trials: Vec<f64> = (0..p.h)
            .map(|h| {
                let base = if p.hist_on {
                    ((f64::from(p.y[h]) + 0.5) / (f64::from(p.n[h]) - f64::from(p.y[h]) + 0.5)).ln()
                } else {
                    0.0
                };
                base + normal(rng, 0.0, 0.1)
            })
            .collect();
        let mean_theta = theta_trials.iter().sum::<f64>() / p.h as f64;
        let mut beta = vec![0.0; p.d];
        beta[0] = mean_theta + normal(rng, 0.0, 0.1);
        let spread = if p.h > 1 {
            (theta_trials.iter().map(|t| (t - mean_theta).powi(2)).sum::<f64>() / (p.h - 1) as f64).sqrt()
        } else {
            0.5
        };
        let tau = spread.clamp(0.05, 2.0);
        let theta_ind = match p.outcome {
            Some(o) => ((f64::from(o.y) + 0.5) / (f64::from(o.n - o.y) + 0.5)).ln(),
            None => 0.0,
        };
        let s = ParameterState {
            theta_trials,
            beta,
            tau,
            sigma: p.hp.sigma_scale,
            theta_hist: 0.0,
            theta_reg: 0.0,
            theta_ind,
            z: Expert::Ind,
        };
        let mut chain = Chain {
            s,
            pred: vec![0.0; p.h + 1],
            w: vec![0.0; p.h],
            mu_hist: 0.0,
            lik: vec![0.0; p.h],
            pred_buf: vec![0.0; p.h + 1],
            pi_buf: vec![0.0; p.h + 1],
            w_buf: vec![0.0; p.h],
            theta_buf: vec![0.0; p.h],
            lik_buf: vec![0.0; p.h],
            props: None,
        };
        chain.refresh(p);
        chain.s.theta_hist = chain.mu_hist;
        chain.s.theta_reg = chain.pred[p.h];
        chain
    }

    /// Recompute every cached quantity from the state.
    fn refresh(&mut self, p: &Prepared) {
        p.predictions(&self.s.beta, &mut self.pred);
        p.weights(&self.pred, &mut self.pi_buf, &mut self.w);
        self.mu_hist = dot(&self.w, &self.s.theta_trials);
        for h in 0..p.h {
            self.lik[h] = p.hist_lik(h, self.s.theta_trials[h]);
        }
    }

    fn run(&mut self, p: &Prepared, mc: &McmcConfig, rng: &mut SpxRng) -> ChainOutput {
        let st = &mc.step_sizes;
        self.props = Some(Proposals {
            theta: Proposal::new(st.theta),
            beta: (0..p.d)
                .map(|_| [Proposal::new(st.beta), Proposal::new(st.beta), Proposal::new(st.beta)])
                .collect(),
            tau: Proposal::new(st.log_tau),
            tau_rescale: Proposal::new(st.log_tau),
            sigma: Proposal::new(st.log_sigma),
            hist: Proposal::new(st.theta_hist),
            reg: Proposal::new(st.theta_reg),
        });
        let total = mc.burn_in + mc.samples * mc.thin;
        let mut out = ChainOutput {
            psi: Vec::with_capacity(mc.samples),
            z: Vec::with_capacity(mc.samples),
            params: Vec::new(),
            rb_sum: [0.0; 3],
            counts: BTreeMap::new(),
        };
        for it in 0..total {
            let adapt = (mc.adapt_burnin && it < mc.burn_in).then_some(it);
            let q = self.sweep(p, rng, adapt);
            if it >= mc.burn_in {
                for k in 0..3 {
                    out.rb_sum[k] += q[k];
                }
                if (it - mc.burn_in + 1).is_multiple_of(mc.thin) {
                    out.psi.push(inv_logit(self.s.theta_new()));
                    out.z.push(self.s.z);
                    if mc.keep_params {
                        out.params.push(self.s.clone());
                    }
                }
            }
        }
        let props = self.props.take().expect("proposals initialized");
        let mut add = |name: &str, prop: &Proposal| {
            let (a, n) = prop.counts();
            let e = out.counts.entry(name.to_string()).or_insert((0, 0));
            e.0 += a;
            e.1 += n;
        };
        add("theta", &props.theta);
        for b in &props.beta {
            add("beta_centered", &b[0]);
            add("beta_shift", &b[1]);
            add("beta_scale", &b[2]);
        }
        add("log_tau", &props.tau);
        add("tau_rescale", &props.tau_rescale);
        add("log_sigma", &props.sigma);
        add("theta_hist", &props.hist);
        add("theta_reg", &props.reg);
        out
    }

    /// One full scan; returns the selector's conditional probabilities.
    fn sweep(&mut self, p: &Prepared, rng: &mut SpxRng, adapt: Option<usize>) -> [f64; 3] {
        let mut props = self.props.take().expect("proposals initialized");
        for h in 0..p.h {
            self.move_theta(p, h, rng, &mut props.theta, adapt);
        }
        for j in 0..p.d {
            for (k, kind) in [BetaMove::Centered, BetaMove::Shift, BetaMove::Scale].into_iter().enumerate() {
                self.move_beta(p, j, kind, rng, &mut props.beta[j][k], adapt);
            }
        }
        self.move_tau(p, rng, &mut props.tau, adapt);
        self.rescale_tau(p, rng, &mut props.tau_rescale, adapt);
        self.move_sigma(p, rng, &mut props.sigma, adapt);
        match self.s.z {
            Expert::Hist => self.move_hist(p, rng, &mut props.hist, adapt),
            Expert::Reg => self.move_reg(p, rng, &mut props.reg, adapt),
            Expert::Ind => {}
        }
        self.props = Some(props);
        self.draw_experts(p, rng);
        let q = z_conditional(self.s.expert_thetas(), p.outcome, p.prior);
        self.s.z = Expert::from_index(categorical(rng, &q));
        q
    }

    fn accept(rng: &mut SpxRng, log_alpha: f64) -> bool {
        log_alpha >= 0.0 || rng.random::<f64>().ln() < log_alpha
    }

    fn move_theta(&mut self, p: &Prepared, h: usize, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        let tau = self.s.tau;
        let sd = prop.scale() / (1.0 / (tau * tau) + p.info[h]).sqrt();
        let old = self.s.theta_trials[h];
        let new = normal(rng, old, sd);
        let lik_new = p.hist_lik(h, new);
        let mut log_alpha = lik_new - self.lik[h] + normal_lpdf(new, self.pred[h], tau)
            - normal_lpdf(old, self.pred[h], tau);
        let shift = self.w[h] * (new - old);
        let anchored = self.s.z == Expert::Hist;
        if anchored {
            log_alpha += p.new_lik(self.s.theta_hist + shift) - p.new_lik(self.s.theta_hist);
        }
        let ok = Self::accept(rng, log_alpha);
        if ok {
            self.s.theta_trials[h] = new;
            self.lik[h] = lik_new;
            self.mu_hist += shift;
            if anchored {
                self.s.theta_hist += shift;
            }
        }
        prop.record(log_alpha, ok, adapt);
    }

    fn move_beta(
        &mut self,
        p: &Prepared,
        j: usize,
        kind: BetaMove,
        rng: &mut SpxRng,
        prop: &mut Proposal,
        adapt: Option<usize>,
    ) {
        let old = self.s.beta[j];
        let eps = normal(rng, 0.0, prop.scale());
        let (new, mut log_alpha) = match kind {
            BetaMove::Centered | BetaMove::Shift => (old + eps, 0.0),
            BetaMove::Scale => (old * eps.exp(), eps),
        };
        let delta = new - old;
        if delta == 0.0 {
            prop.record(0.0, true, adapt);
            return;
        }
        log_alpha += cauchy_lpdf(new, p.hp.beta_scale) - cauchy_lpdf(old, p.hp.beta_scale);
        for h in 0..p.h {
            self.pred_buf[h] = self.pred[h] + delta * p.x[h * p.d + j];
        }
        self.pred_buf[p.h] = self.pred[p.h] + delta * p.x_new[j];
        let follow = !matches!(kind, BetaMove::Centered);
        let tau = self.s.tau;
        for h in 0..p.h {
            let theta = self.s.theta_trials[h];
            if follow {
                let moved = theta + delta * p.x[h * p.d + j];
                self.theta_buf[h] = moved;
                self.lik_buf[h] = p.hist_lik(h, moved);
                log_alpha += self.lik_buf[h] - self.lik[h];
            } else {
                self.theta_buf[h] = theta;
                log_alpha += normal_lpdf(theta, self.pred_buf[h], tau) - normal_lpdf(theta, self.pred[h], tau);
            }
        }
        // weights are only needed now if the direct-borrowing expert is live
        let mut new_weights = false;
        let mut mu_new = self.mu_hist;
        let mut expert_new = self.s.expert_theta(self.s.z);
        match self.s.z {
            Expert::Hist => {
                p.weights(&self.pred_buf, &mut self.pi_buf, &mut self.w_buf);
                new_weights = true;
                mu_new = dot(&self.w_buf, &self.theta_buf);
                expert_new = self.s.theta_hist + (mu_new - self.mu_hist);
            }
            Expert::Reg => {
                expert_new = self.s.theta_reg + delta * p.x_new[j];
            }
            Expert::Ind => {}
        }
        if self.s.z != Expert::Ind {
            log_alpha += p.new_lik(expert_new) - p.new_lik(self.s.expert_theta(self.s.z));
        }
        let ok = Self::accept(rng, log_alpha);
        if ok {
            self.s.beta[j] = new;
            std::mem::swap(&mut self.pred, &mut self.pred_buf);
            if follow {
                std::mem::swap(&mut self.s.theta_trials, &mut self.theta_buf);
                std::mem::swap(&mut self.lik, &mut self.lik_buf);
            }
            if new_weights {
                std::mem::swap(&mut self.w, &mut self.w_buf);
            } else {
                p.weights(&self.pred, &mut self.pi_buf, &mut self.w);
                mu_new = dot(&self.w, &self.s.theta_trials);
            }
            self.mu_hist = mu_new;
            match self.s.z {
                Expert::Hist => self.s.theta_hist = expert_new,
                Expert::Reg => self.s.theta_reg = expert_new,
                Expert::Ind => {}
            }
        }
        prop.record(log_alpha, ok, adapt);
    }

    fn move_tau(&mut self, p: &Prepared, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        let eps = normal(rng, 0.0, prop.scale());
        let old = self.s.tau;
        let new = old * eps.exp();
        let mut log_alpha = eps + half_cauchy_lpdf(new, p.hp.tau_scale) - half_cauchy_lpdf(old, p.hp.tau_scale);
        for h in 0..p.h {
            let t = self.s.theta_trials[h];
            log_alpha += normal_lpdf(t, self.pred[h], new) - normal_lpdf(t, self.pred[h], old);
        }
        if self.s.z == Expert::Reg {
            let t = self.s.theta_reg;
            log_alpha += normal_lpdf(t, self.pred[p.h], p.sqrt_c * new) - normal_lpdf(t, self.pred[p.h], p.sqrt_c * old);
        }
        let ok = new.is_finite() && Self::accept(rng, log_alpha);
        if ok {
            self.s.tau = new;
        }
        prop.record(log_alpha, ok, adapt);
    }

    /// Rescale `tau` together with every residual it governs.
    fn rescale_tau(&mut self, p: &Prepared, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        let eps = normal(rng, 0.0, prop.scale());
        let ratio = eps.exp();
        let new_tau = self.s.tau * ratio;
        if !(new_tau.is_finite() && new_tau > 0.0) {
            prop.record(f64::NEG_INFINITY, false, adapt);
            return;
        }
        // tau Jacobian (log scale) plus one factor of `ratio` per rescaled coordinate;
        // these cancel against the normal terms, which are unchanged in standardized form
        let mut log_alpha = eps + half_cauchy_lpdf(new_tau, p.hp.tau_scale) - half_cauchy_lpdf(self.s.tau, p.hp.tau_scale);
        for h in 0..p.h {
            let moved = self.pred[h] + ratio * (self.s.theta_trials[h] - self.pred[h]);
            self.theta_buf[h] = moved;
            self.lik_buf[h] = p.hist_lik(h, moved);
            log_alpha += self.lik_buf[h] - self.lik[h];
        }
        let mut expert_new = self.s.expert_theta(self.s.z);
        let mut mu_new = self.mu_hist;
        match self.s.z {
            Expert::Hist => {
                mu_new = dot(&self.w, &self.theta_buf);
                expert_new = self.s.theta_hist + (mu_new - self.mu_hist);
            }
            Expert::Reg => {
                expert_new = self.pred[p.h] + ratio * (self.s.theta_reg - self.pred[p.h]);
            }
            Expert::Ind => {}
        }
        if self.s.z != Expert::Ind {
            log_alpha += p.new_lik(expert_new) - p.new_lik(self.s.expert_theta(self.s.z));
        }
        let ok = log_alpha.is_finite() && Self::accept(rng, log_alpha);
        if ok {
            self.s.tau = new_tau;
            std::mem::swap(&mut self.s.theta_trials, &mut self.theta_buf);
            std::mem::swap(&mut self.lik, &mut self.lik_buf);
            self.mu_hist = if self.s.z == Expert::Hist {
                mu_new
            } else {
                dot(&self.w, &self.s.theta_trials)
            };
            match self.s.z {
                Expert::Hist => self.s.theta_hist = expert_new,
                Expert::Reg => self.s.theta_reg = expert_new,
                Expert::Ind => {}
            }
        }
        prop.record(log_alpha, ok, adapt);
    }

    fn move_sigma(&mut self, p: &Prepared, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        if self.s.z != Expert::Hist {
            // theta_hist is integrated out, so sigma's conditional is its prior
            self.s.sigma = half_cauchy(rng, p.hp.sigma_scale);
            return;
        }
        let eps = normal(rng, 0.0, prop.scale());
        let old = self.s.sigma;
        let new = old * eps.exp();
        let t = self.s.theta_hist;
        let log_alpha = eps + half_cauchy_lpdf(new, p.hp.sigma_scale) - half_cauchy_lpdf(old, p.hp.sigma_scale)
            + normal_lpdf(t, self.mu_hist, new)
            - normal_lpdf(t, self.mu_hist, old);
        let ok = new.is_finite() && new > 0.0 && Self::accept(rng, log_alpha);
        if ok {
            self.s.sigma = new;
        }
        prop.record(log_alpha, ok, adapt);
    }

    fn move_hist(&mut self, p: &Prepared, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        let sd = prop.scale() / (1.0 / self.s.sigma.powi(2) + p.info_new).sqrt();
        let old = self.s.theta_hist;
        let new = normal(rng, old, sd);
        let log_alpha = normal_lpdf(new, self.mu_hist, self.s.sigma) - normal_lpdf(old, self.mu_hist, self.s.sigma)
            + p.new_lik(new)
            - p.new_lik(old);
        let ok = Self::accept(rng, log_alpha);
        if ok {
            self.s.theta_hist = new;
        }
        prop.record(log_alpha, ok, adapt);
    }

    fn move_reg(&mut self, p: &Prepared, rng: &mut SpxRng, prop: &mut Proposal, adapt: Option<usize>) {
        let prior_sd = p.sqrt_c * self.s.tau;
        let sd = prop.scale() / (1.0 / (prior_sd * prior_sd) + p.info_new).sqrt();
        let old = self.s.theta_reg;
        let new = normal(rng, old, sd);
        let mean = self.pred[p.h];
        let log_alpha =
            normal_lpdf(new, mean, prior_sd) - normal_lpdf(old, mean, prior_sd) + p.new_lik(new) - p.new_lik(old);
        let ok = Self::accept(rng, log_alpha);
        if ok {
            self.s.theta_reg = new;
        }
        prop.record(log_alpha, ok, adapt);
    }

    /// Exact draws for the unselected experts, and the conjugate draw for `ind`.
    fn draw_experts(&mut self, p: &Prepared, rng: &mut SpxRng) {
        if self.s.z != Expert::Hist {
            self.s.theta_hist = normal(rng, self.mu_hist, self.s.sigma);
        }
        if self.s.z != Expert::Reg {
            self.s.theta_reg = normal(rng, self.pred[p.h], p.sqrt_c * self.s.tau);
        }
        self.s.theta_ind = match (self.s.z, p.outcome) {
            (Expert::Ind, Some(o)) => logit_beta(rng, 0.5 + f64::from(o.y), 0.5 + f64::from(o.n - o.y)),
            _ => logit_beta(rng, 0.5, 0.5),
        };
    }
}

fn merge(chains: Vec<ChainOutput>, mc: &McmcConfig) -> Result<PosteriorDraws> {
    let mut psi = Vec::with_capacity(mc.total_draws());
    let mut z = Vec::with_capacity(mc.total_draws());
    let mut params = Vec::new();
    let mut rb = [0.0; 3];
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let n_chains = chains.len();
    for c in chains {
        psi.extend(c.psi);
        z.extend(c.z);
        params.extend(c.params);
        for k in 0..3 {
            rb[k] += c.rb_sum[k];
        }
        for (k, (a, n)) in c.counts {
            let e = counts.entry(k).or_insert((0, 0));
            e.0 += a;
            e.1 += n;
        }
    }
    if psi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Runtime("sampler produced non-finite draws".into()));
    }
    let total: f64 = rb.iter().sum();
    let rb_weights = rb.map(|v| v / total);
    Ok(PosteriorDraws {
        psi_new: psi,
        z_draws: z,
        rb_weights,
        full_params: mc.keep_params.then_some(params),
        trace: None,
        diagnostics: Diagnostics::from_counts(n_chains, &counts),
    })
}
