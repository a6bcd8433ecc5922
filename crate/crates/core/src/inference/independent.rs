//! Conjugate no-borrowing comparator.

use super::config::McmcConfig;
use super::draws::{Diagnostics, PosteriorDraws};
use super::sampling::logit_beta;
use crate::error::Result;
use crate::model::{inv_logit, Expert, Outcome};
use crate::rng::{stream, tag};

/// Prior on the new trial's control rate when nothing is borrowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConjugatePrior {
    /// `Logistic(0, 1)` on the logit, i.e. `Beta(1, 1)`.
    #[default]
    Uniform,
    /// `Beta(0.5, 0.5)`, the prior of the SPx independent expert.
    Jeffreys,
}

impl ConjugatePrior {
    pub fn shape(self) -> f64 {
        match self {
            ConjugatePrior::Uniform => 1.0,
            ConjugatePrior::Jeffreys => 0.5,
        }
    }

    /// Posterior Beta parameters after observing `outcome`.
    pub fn posterior(self, outcome: Outcome) -> (f64, f64) {
        let a = self.shape();
        (a + f64::from(outcome.y), a + f64::from(outcome.n - outcome.y))
    }
}

/// Direct draws from `Beta(1 + y, 1 + n - y)`; `mc` supplies the seed and draw count.
pub fn fit_independent(outcome: Outcome, mc: &McmcConfig) -> Result<PosteriorDraws> {
    fit_conjugate(outcome, ConjugatePrior::Uniform, mc)
}

pub fn fit_conjugate(outcome: Outcome, prior: ConjugatePrior, mc: &McmcConfig) -> Result<PosteriorDraws> {
    mc.validate()?;
    let (a, b) = prior.posterior(outcome);
    let mut rng = stream(mc.seed, &[tag::CHAIN, 0]);
    let n = mc.total_draws();
    let psi_new = (0..n).map(|_| inv_logit(logit_beta(&mut rng, a, b))).collect();
    Ok(PosteriorDraws {
        psi_new,
        z_draws: vec![Expert::Ind; n],
        rb_weights: [0.0, 0.0, 1.0],
        full_params: None,
        trace: None,
        diagnostics: Diagnostics {
            chains: 1,
            ..Diagnostics::default()
        },
    })
}
