//! TOML run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::data::{case_study, load_historical_csv, HistoricalTable};
use crate::design::DesignConfig;
use crate::error::{Error, Result};
use crate::inference::{McmcConfig, Method, ModelSettings, RmapParams};
use crate::model::{Dataset, NewTrial, Outcome, SpxHyperParams, Standardization};
use crate::sim::{DesignKind, ScenarioConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fit,
    Ess,
    Design,
    Simulate,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Fit => "fit",
            Mode::Ess => "ess",
            Mode::Design => "design",
            Mode::Simulate => "simulate",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Historical table; the bundled case study when unset. Relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewTrialConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Raw-scale covariate values keyed by column name.
    #[serde(default)]
    pub covariates: BTreeMap<String, f64>,
}

/// Design overrides; unset fields follow `DesignConfig::with_n_max`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_stage1: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_positive: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_clinical: Option<f64>,
}

impl DesignOverrides {
    pub fn resolve(&self, default_n_max: u32) -> Result<DesignConfig> {
        let mut dc = DesignConfig::with_n_max(self.n_max.unwrap_or(default_n_max));
        if let Some(v) = self.n_stage1 {
            dc.n_stage1 = v;
        }
        if let Some(v) = self.p_min {
            dc.p_min = v;
        }
        if let Some(v) = self.p_max {
            dc.p_max = v;
        }
        if let Some(v) = self.delta0 {
            dc.delta0 = v;
        }
        if let Some(v) = self.q_positive {
            dc.q_positive = v;
        }
        if let Some(v) = self.q_clinical {
            dc.q_clinical = v;
        }
        dc.validate()?;
        Ok(dc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    /// Preset 1-4; replaces the covariate flag, misleading flag and true rate of `[scenario]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<u8>,
    pub design: DesignKind,
    pub replicates: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            scenario: None,
            design: DesignKind::Fixed,
            replicates: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    /// Interim control size at which each hypothetical rate is observed.
    pub n: u32,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            start: 0.10,
            end: 0.50,
            step: 0.02,
            n: 75,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_model")]
    pub model: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_trial: Option<NewTrialConfig>,
    #[serde(default)]
    pub spx: SpxHyperParams,
    #[serde(default)]
    pub rmap: RmapParams,
    /// MCMC settings; the analysis profile for single fits and the fast
    /// profile for simulations when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcmc: Option<McmcConfig>,
    #[serde(default)]
    pub design: DesignOverrides,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_model() -> Method {
    Method::Spx
}

fn default_seed() -> u64 {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            model: Method::Spx,
            mode: None,
            seed: 1,
            paths: Paths::default(),
            new_trial: None,
            spx: SpxHyperParams::default(),
            rmap: RmapParams::default(),
            mcmc: None,
            design: DesignOverrides::default(),
            scenario: ScenarioConfig::default(),
            simulate: SimulateConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Load `path`; relative input/output paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.paths.input, &mut cfg.paths.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(input) = &cfg.paths.input {
            if !input.is_file() {
                return Err(Error::InvalidConfig(format!("input file {} does not exist", input.display())));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.spx.validate()?;
        self.rmap.validate()?;
        if let Some(mc) = &self.mcmc {
            mc.validate()?;
        }
        self.scenario.validate()?;
        if let Some(id) = self.simulate.scenario {
            ScenarioConfig::scenario(id)?;
        }
        let s = &self.sweep;
        if !(s.step > 0.0 && s.start >= 0.0 && s.end <= 1.0 && s.start <= s.end) || s.n == 0 {
            return Err(Error::InvalidConfig("sweep needs 0 <= start <= end <= 1, step > 0 and n > 0".into()));
        }
        Ok(())
    }

    pub fn settings(&self) -> ModelSettings {
        ModelSettings {
            spx: self.spx,
            rmap: self.rmap,
        }
    }

    /// MCMC settings for `mode`, seeded from the run seed.
    pub fn mcmc_for(&self, mode: Mode) -> McmcConfig {
        let base = self.mcmc.unwrap_or_else(|| match mode {
            Mode::Simulate => McmcConfig::fast(),
            _ => McmcConfig::analysis(),
        });
        base.with_seed(self.seed)
    }

    pub fn historical_table(&self) -> Result<HistoricalTable> {
        match &self.paths.input {
            Some(p) => load_historical_csv(p),
            None => Ok(case_study()),
        }
    }

    /// Standardized data set for the configured new trial.
    pub fn dataset(&self) -> Result<(Dataset, Standardization)> {
        let table = self.historical_table()?;
        let new_trial = match &self.new_trial {
            Some(nt) => {
                let values: Vec<(String, f64)> = nt.covariates.iter().map(|(k, v)| (k.clone(), *v)).collect();
                let x = table.covariates_from(&values)?;
                let outcome = match (nt.y, nt.n) {
                    (Some(y), Some(n)) => Some(Outcome::new(y, n).map_err(|e| Error::InvalidConfig(e.to_string()))?),
                    (None, None) => None,
                    _ => return Err(Error::InvalidConfig("new_trial needs both y and n, or neither".into())),
                };
                Some(NewTrial {
                    id: "new".into(),
                    x,
                    outcome,
                })
            }
            None => None,
        };
        table.dataset(new_trial)
    }

    /// Scenario after applying the preset, if any.
    pub fn scenario_config(&self) -> Result<ScenarioConfig> {
        let mut sc = self.scenario.clone();
        if let Some(id) = self.simulate.scenario {
            let preset = ScenarioConfig::scenario(id)?;
            sc.covariates_predictive = preset.covariates_predictive;
            sc.hist_misleading = preset.hist_misleading;
            sc.true_new_rate = preset.true_new_rate;
        }
        sc.validate()?;
        Ok(sc)
    }
}
