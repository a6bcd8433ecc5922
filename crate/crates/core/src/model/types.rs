use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Control-arm summary of one completed trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub id: String,
    pub n: u32,
    pub y: u32,
    /// Covariates with a leading intercept entry of 1.
    pub x: Vec<f64>,
}

impl TrialSummary {
    pub fn new(id: impl Into<String>, n: u32, y: u32, x: Vec<f64>) -> Result<Self> {
        let t = TrialSummary {
            id: id.into(),
            n,
            y,
            x,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidDataset(format!("trial {}: n must be positive", self.id)));
        }
        if self.y > self.n {
            return Err(Error::InvalidDataset(format!(
                "trial {}: y = {} exceeds n = {}",
                self.id, self.y, self.n
            )));
        }
        check_covariates(&self.id, &self.x)
    }

    pub fn rate(&self) -> f64 {
        f64::from(self.y) / f64::from(self.n)
    }
}

fn check_covariates(id: &str, x: &[f64]) -> Result<()> {
    if x.first() != Some(&1.0) {
        return Err(Error::InvalidDataset(format!(
            "trial {id}: covariate vector must start with intercept 1"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDataset(format!("trial {id}: non-finite covariate")));
    }
    Ok(())
}

/// Observed binomial outcome of the new trial's control arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub y: u32,
    pub n: u32,
}

impl Outcome {
    pub fn new(y: u32, n: u32) -> Result<Self> {
        if n == 0 || y > n {
            return Err(Error::InvalidDataset(format!("invalid outcome {y}/{n}")));
        }
        Ok(Outcome { y, n })
    }

    pub fn rate(&self) -> f64 {
        f64::from(self.y) / f64::from(self.n)
    }
}

/// The trial being planned or analysed. Its outcome may be unknown at design time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewTrial {
    pub id: String,
    pub x: Vec<f64>,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub historical: Vec<TrialSummary>,
    pub new_trial: NewTrial,
}

impl Dataset {
    pub fn new(historical: Vec<TrialSummary>, new_trial: NewTrial) -> Result<Self> {
        let d = Dataset {
            historical,
            new_trial,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.historical.is_empty() {
            return Err(Error::InvalidDataset("at least one historical trial is required".into()));
        }
        let dim = self.new_trial.x.len();
        check_covariates(&self.new_trial.id, &self.new_trial.x)?;
        for t in &self.historical {
            t.validate()?;
            if t.x.len() != dim {
                return Err(Error::InvalidDataset(format!(
                    "trial {}: covariate dimension {} differs from new trial's {}",
                    t.id,
                    t.x.len(),
                    dim
                )));
            }
        }
        if let Some(o) = self.new_trial.outcome {
            Outcome::new(o.y, o.n)?;
        }
        Ok(())
    }

    /// Number of historical trials `H`.
    pub fn n_hist(&self) -> usize {
        self.historical.len()
    }

    /// Covariate dimension including the intercept.
    pub fn dim(&self) -> usize {
        self.new_trial.x.len()
    }

    pub fn with_outcome(&self, outcome: Outcome) -> Dataset {
        let mut d = self.clone();
        d.new_trial.outcome = Some(outcome);
        d
    }

    pub fn outcome(&self) -> Result<Outcome> {
        self.new_trial
            .outcome
            .ok_or_else(|| Error::InvalidDataset("new trial outcome (y, n) is required".into()))
    }

    /// Standardize continuous covariate columns against the historical trials.
    ///
    /// Columns whose historical values are all 0 or 1 are treated as binary and
    /// left untouched; others are centered to mean 0 and scaled to sd 1
    /// (sample sd). The new trial is transformed with the historical moments.
    pub fn standardized(&self) -> (Dataset, Standardization) {
        let dim = self.dim();
        let h = self.historical.len() as f64;
        let mut columns = Vec::with_capacity(dim.saturating_sub(1));
        for j in 1..dim {
            let vals: Vec<f64> = self.historical.iter().map(|t| t.x[j]).collect();
            let binary = vals.iter().all(|&v| v == 0.0 || v == 1.0);
            if binary {
                columns.push(ColumnScaling::Binary);
                continue;
            }
            let mean = vals.iter().sum::<f64>() / h;
            let var = if vals.len() > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (h - 1.0)
            } else {
                0.0
            };
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            columns.push(ColumnScaling::Continuous { mean, sd });
        }
        let s = Standardization { columns };
        let mut out = self.clone();
        for t in &mut out.historical {
            s.apply(&mut t.x);
        }
        s.apply(&mut out.new_trial.x);
        (out, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnScaling {
    Binary,
    Continuous { mean: f64, sd: f64 },
}

/// Per-column transform applied at ingestion (intercept excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub columns: Vec<ColumnScaling>,
}

impl Standardization {
    pub fn apply(&self, x: &mut [f64]) {
        for (v, c) in x.iter_mut().skip(1).zip(&self.columns) {
            if let ColumnScaling::Continuous { mean, sd } = *c {
                *v = (*v - mean) / sd;
            }
        }
    }
}

/// Fixed constants of the SPx prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpxHyperParams {
    pub p_hist: f64,
    pub p_reg: f64,
    pub p_ind: f64,
    /// Half-Cauchy scale of the direct-borrowing sd (logit units).
    pub sigma_scale: f64,
    /// Half-Cauchy scale of the regression residual sd (logit units).
    pub tau_scale: f64,
    pub beta_scale: f64,
    /// Variance shrink factor of the regression expert relative to `tau^2`.
    pub c: f64,
    pub w_base: f64,
    pub w_bandwidth: f64,
}

impl Default for SpxHyperParams {
    fn default() -> Self {
        SpxHyperParams {
            p_hist: 1.0 / 8.0,
            p_reg: 1.0 / 8.0,
            p_ind: 3.0 / 4.0,
            sigma_scale: 0.02,
            tau_scale: 2.5,
            beta_scale: 2.5,
            c: 1.0 / 25.0,
            w_base: 0.5,
            w_bandwidth: 0.05,
        }
    }
}

impl SpxHyperParams {
    pub fn validate(&self) -> Result<()> {
        let probs = [self.p_hist, self.p_reg, self.p_ind];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidConfig("expert prior probabilities must lie in [0, 1]".into()));
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig("expert prior probabilities must sum to 1".into()));
        }
        let positive = [self.sigma_scale, self.tau_scale, self.beta_scale, self.c, self.w_bandwidth];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidConfig("SPx scales, c and w_bandwidth must be positive".into()));
        }
        if !(self.w_base > 0.0 && self.w_base < 1.0) {
            return Err(Error::InvalidConfig("w_base must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn prior_probs(&self) -> [f64; 3] {
        [self.p_hist, self.p_reg, self.p_ind]
    }
}

/// Expert (submodel) of the new trial's logit rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expert {
    Hist,
    Reg,
    Ind,
}

impl Expert {
    pub const ALL: [Expert; 3] = [Expert::Hist, Expert::Reg, Expert::Ind];

    pub fn index(self) -> usize {
        match self {
            Expert::Hist => 0,
            Expert::Reg => 1,
            Expert::Ind => 2,
        }
    }

    pub fn from_index(i: usize) -> Expert {
        Expert::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Expert::Hist => "hist",
            Expert::Reg => "reg",
            Expert::Ind => "ind",
        }
    }
}

/// Full latent state of the SPx model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterState {
    /// Logit control rates of the historical trials.
    pub theta_trials: Vec<f64>,
    pub beta: Vec<f64>,
    pub tau: f64,
    pub sigma: f64,
    pub theta_hist: f64,
    pub theta_reg: f64,
    pub theta_ind: f64,
    pub z: Expert,
}

impl ParameterState {
    pub fn expert_theta(&self, k: Expert) -> f64 {
        match k {
            Expert::Hist => self.theta_hist,
            Expert::Reg => self.theta_reg,
            Expert::Ind => self.theta_ind,
        }
    }

    pub fn expert_thetas(&self) -> [f64; 3] {
        [self.theta_hist, self.theta_reg, self.theta_ind]
    }

    /// Logit rate of the new trial under the selected expert.
    pub fn theta_new(&self) -> f64 {
        self.expert_theta(self.z)
    }

    pub fn is_valid(&self) -> bool {
        self.tau > 0.0
            && self.sigma > 0.0
            && self.tau.is_finite()
            && self.sigma.is_finite()
            && self.theta_trials.iter().chain(&self.beta).all(|v| v.is_finite())
            && self.expert_thetas().iter().all(|v| v.is_finite())
    }
}

/// Which binomial terms enter the target density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodMode {
    #[default]
    Full,
    /// Historical trials only; the new trial's outcome is ignored.
    HistoricalOnly,
    /// No binomial terms at all: the sampler explores the prior.
    PriorOnly,
}

impl LikelihoodMode {
    pub fn historical(self) -> bool {
        !matches!(self, LikelihoodMode::PriorOnly)
    }

    pub fn new_trial(self) -> bool {
        matches!(self, LikelihoodMode::Full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(id: &str, n: u32, y: u32, age: f64, mtx: f64) -> TrialSummary {
        TrialSummary::new(id, n, y, vec![1.0, mtx, age]).unwrap()
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(TrialSummary::new("a", 40, 50, vec![1.0]).is_err());
        assert!(TrialSummary::new("a", 0, 0, vec![1.0]).is_err());
        assert!(TrialSummary::new("a", 10, 2, vec![0.0]).is_err());
        assert!(TrialSummary::new("a", 10, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn dataset_requires_matching_dims() {
        let h = vec![trial("a", 10, 2, 50.0, 1.0)];
        let nt = NewTrial {
            id: "new".into(),
            x: vec![1.0, 1.0],
            outcome: None,
        };
        assert!(Dataset::new(h.clone(), nt).is_err());
        assert!(Dataset::new(
            vec![],
            NewTrial {
                id: "new".into(),
                x: vec![1.0],
                outcome: None
            }
        )
        .is_err());
    }

    #[test]
    fn standardization_leaves_binary_columns() {
        let h = vec![
            trial("a", 10, 2, 50.0, 1.0),
            trial("b", 10, 3, 54.0, 0.0),
            trial("c", 10, 4, 52.0, 1.0),
        ];
        let nt = NewTrial {
            id: "new".into(),
            x: vec![1.0, 1.0, 53.0],
            outcome: None,
        };
        let (d, s) = Dataset::new(h, nt).unwrap().standardized();
        assert_eq!(s.columns[0], ColumnScaling::Binary);
        let ages: Vec<f64> = d.historical.iter().map(|t| t.x[2]).collect();
        assert!((ages.iter().sum::<f64>()).abs() < 1e-12);
        assert!((ages[0] + 1.0).abs() < 1e-12 && (ages[1] - 1.0).abs() < 1e-12);
        assert!((d.new_trial.x[2] - 0.5).abs() < 1e-12);
        assert_eq!(d.new_trial.x[1], 1.0);
    }

    #[test]
    fn default_hyperparams_valid() {
        SpxHyperParams::default().validate().unwrap();
        let mut hp = SpxHyperParams::default();
        hp.p_ind = 0.5;
        assert!(hp.validate().is_err());
        hp = SpxHyperParams {
            w_base: 1.0,
            ..SpxHyperParams::default()
        };
        assert!(hp.validate().is_err());
    }
}
