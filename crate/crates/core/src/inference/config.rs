use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LikelihoodMode;

/// Initial random-walk scales per block, before any burn-in adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepSizes {
    /// Multiplier on the approximate conditional sd of each historical logit rate.
    pub theta: f64,
    pub beta: f64,
    pub log_tau: f64,
    pub log_sigma: f64,
    /// Multiplier on the approximate conditional sd of the selected expert.
    pub theta_hist: f64,
    pub theta_reg: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        StepSizes {
            theta: 1.5,
            beta: 0.3,
            log_tau: 0.5,
            log_sigma: 0.8,
            theta_hist: 1.5,
            theta_reg: 1.5,
        }
    }
}

impl StepSizes {
    fn all(&self) -> [f64; 6] {
        [self.theta, self.beta, self.log_tau, self.log_sigma, self.theta_hist, self.theta_reg]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcConfig {
    pub chains: usize,
    pub burn_in: usize,
    /// Retained draws per chain (after thinning).
    pub samples: usize,
    pub thin: usize,
    pub seed: u64,
    pub step_sizes: StepSizes,
    /// Robbins-Monro step-size adaptation during burn-in.
    pub adapt_burnin: bool,
    /// Keep every retained parameter state in the output.
    pub keep_params: bool,
    pub likelihood: LikelihoodMode,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig::analysis()
    }
}

impl McmcConfig {
    /// 4 chains x 10,000 burn-in x 10,000 retained draws.
    pub fn analysis() -> Self {
        McmcConfig {
            chains: 4,
            burn_in: 10_000,
            samples: 10_000,
            thin: 1,
            seed: 1,
            step_sizes: StepSizes::default(),
            adapt_burnin: true,
            keep_params: false,
            likelihood: LikelihoodMode::Full,
        }
    }

    /// Single short chain for the replicated-trial harness.
    pub fn fast() -> Self {
        McmcConfig {
            chains: 1,
            burn_in: 2_000,
            samples: 2_000,
            ..McmcConfig::analysis()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.samples == 0 || self.thin == 0 {
            return Err(Error::InvalidConfig("chains, samples and thin must be at least 1".into()));
        }
        if self.step_sizes.all().iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidConfig("step sizes must be positive".into()));
        }
        Ok(())
    }

    pub fn total_draws(&self) -> usize {
        self.chains * self.samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_are_valid() {
        McmcConfig::analysis().validate().unwrap();
        McmcConfig::fast().validate().unwrap();
        assert_eq!(McmcConfig::fast().total_draws(), 2_000);
        let bad = McmcConfig {
            thin: 0,
            ..McmcConfig::fast()
        };
        assert!(bad.validate().is_err());
        let mut bad = McmcConfig::fast();
        bad.step_sizes.beta = 0.0;
        assert!(bad.validate().is_err());
    }
}
