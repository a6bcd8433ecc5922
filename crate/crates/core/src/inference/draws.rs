use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Expert, ParameterState};

/// Post-burn-in acceptance counts per proposal kind, pooled over chains.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub chains: usize,
    pub acceptance: BTreeMap<String, f64>,
}

impl Diagnostics {
    pub(crate) fn from_counts(chains: usize, counts: &BTreeMap<String, (u64, u64)>) -> Self {
        let acceptance = counts
            .iter()
            .filter(|(_, (_, n))| *n > 0)
            .map(|(k, (a, n))| (k.clone(), *a as f64 / *n as f64))
            .collect();
        Diagnostics { chains, acceptance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    /// Draws of the new trial's control rate.
    pub psi_new: Vec<f64>,
    /// Selected component per retained draw.
    pub z_draws: Vec<Expert>,
    /// Rao-Blackwellized posterior probabilities of (hist, reg, ind).
    pub rb_weights: [f64; 3],
    pub full_params: Option<Vec<ParameterState>>,
    /// Named hyperparameter traces for samplers that do not use `ParameterState`.
    pub trace: Option<BTreeMap<String, Vec<f64>>>,
    pub diagnostics: Diagnostics,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.psi_new.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi_new.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.psi_new)
    }

    /// Fraction of retained draws assigned to each component.
    pub fn z_frequencies(&self) -> [f64; 3] {
        let mut f = [0.0; 3];
        for z in &self.z_draws {
            f[z.index()] += 1.0;
        }
        let n = self.z_draws.len().max(1) as f64;
        f.map(|v| v / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub variance: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub n_draws: usize,
}

impl PosteriorSummary {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn covers(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divisor `n`).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Linear-interpolation quantile of sorted data (R type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean, variance and equal-tailed interval of `psi_new` at `level`.
pub fn summarize(draws: &PosteriorDraws, level: f64) -> Result<PosteriorSummary> {
    summarize_values(&draws.psi_new, level)
}

pub fn summarize_values(values: &[f64], level: f64) -> Result<PosteriorSummary> {
    if values.is_empty() {
        return Err(Error::Degenerate("no draws to summarize".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("interval level must be in (0, 1), got {level}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(PosteriorSummary {
        mean: mean(values),
        variance: variance(values),
        lower: quantile_sorted(&sorted, tail),
        upper: quantile_sorted(&sorted, 1.0 - tail),
        level,
        n_draws: values.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(v: Vec<f64>) -> PosteriorDraws {
        PosteriorDraws {
            z_draws: vec![Expert::Ind; v.len()],
            psi_new: v,
            rb_weights: [0.0, 0.0, 1.0],
            full_params: None,
            trace: None,
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn constant_draws() {
        let s = summarize(&draws(vec![0.3; 50]), 0.95).unwrap();
        assert!((s.mean - 0.3).abs() < 1e-15);
        assert_eq!(s.width(), 0.0);
        assert!(s.variance < 1e-30);
    }

    #[test]
    fn percent_grid_interval() {
        let v: Vec<f64> = (1..=99).rev().map(|i| f64::from(i) / 100.0).collect();
        let s = summarize(&draws(v), 0.95).unwrap();
        assert!((s.lower - 0.03).abs() < 0.01, "{}", s.lower);
        assert!((s.upper - 0.97).abs() < 0.01, "{}", s.upper);
        assert!((s.mean - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_and_bad_level() {
        assert!(summarize(&draws(vec![]), 0.95).is_err());
        assert!(summarize(&draws(vec![0.1]), 1.0).is_err());
    }
}
