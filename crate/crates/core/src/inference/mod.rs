mod adapt;
pub mod config;
pub mod draws;
pub mod independent;
pub mod prior;
pub mod rmap;
pub mod sampling;
pub mod spx;

use serde::{Deserialize, Serialize};

pub use config::{McmcConfig, StepSizes};
pub use draws::{mean, quantile_sorted, variance, summarize, summarize_values, Diagnostics, PosteriorDraws, PosteriorSummary};
pub use independent::{fit_conjugate, fit_independent, ConjugatePrior};
pub use prior::{sample_rmap_prior, sample_spx_prior};
pub use rmap::{fit_rmap, RmapParams, RmapState};
pub use spx::{fit_spx, update_z, z_conditional};

use crate::error::Result;
use crate::model::{Dataset, SpxHyperParams};

/// Control-arm model used for borrowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spx,
    Rmap,
    Independent,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Spx, Method::Rmap, Method::Independent];

    pub fn name(self) -> &'static str {
        match self {
            Method::Spx => "spx",
            Method::Rmap => "rmap",
            Method::Independent => "independent",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spx" => Ok(Method::Spx),
            "rmap" => Ok(Method::Rmap),
            "independent" | "ind" => Ok(Method::Independent),
            _ => Err(crate::Error::InvalidConfig(format!(
                "unknown model '{s}' (expected spx, rmap or independent)"
            ))),
        }
    }
}

/// Model settings for every method, so callers can switch methods freely.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelSettings {
    pub spx: SpxHyperParams,
    pub rmap: RmapParams,
}

/// Fit `method` to `dataset`, whose new trial must carry an outcome.
pub fn fit(method: Method, dataset: &Dataset, settings: &ModelSettings, mc: &McmcConfig) -> Result<PosteriorDraws> {
    match method {
        Method::Spx => fit_spx(dataset, &settings.spx, mc),
        Method::Rmap => fit_rmap(dataset, &settings.rmap, mc),
        Method::Independent => fit_independent(dataset.outcome()?, mc),
    }
}
