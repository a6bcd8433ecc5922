//! Historical data sets and new-trial data for the four simulation scenarios.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::sampling::normal;
use crate::model::{inv_logit, logit, Dataset, NewTrial, TrialSummary};
use crate::rng::{stream, tag, SpxRng};

/// Generating coefficients of the full covariate vector (first entry binary).
const BETA_STAR: [f64; 6] = [1.0, 0.6, 0.3, 0.3, 0.2, 0.2];
const BETA_TAIL: f64 = 0.2;
/// Trial-level noise on the generating logit scale.
const NOISE_SD: f64 = 0.1;
/// Accepted distance between the observed and target historical mean rate.
const MEAN_TOL: f64 = 0.01;
const OBSERVED_RANGE: (f64, f64) = (0.10, 0.40);
/// Largest |correlation| between any covariate and the observed rates after permutation.
const PERMUTED_MAX_CORR: f64 = 0.2;
const MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_hist_trials: usize,
    pub hist_size_range: (u32, u32),
    pub n_covariates: usize,
    /// Leading covariates visible to the model.
    pub used_covariates: usize,
    pub covariates_predictive: bool,
    pub hist_misleading: bool,
    pub true_new_rate: f64,
    /// Effect of the treatment arm used for power; the Type I arm has none.
    pub true_effect: f64,
    /// Treatment arm size; the design's `n_max` when unset.
    pub n_trt: Option<u32>,
    pub target_hist_mean: f64,
    pub target_hist_range: (f64, f64),
    pub hist_seed: u64,
    /// New trial's model-visible covariates on the raw scale, intercept excluded.
    pub x_new: Option<Vec<f64>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_hist_trials: 15,
            hist_size_range: (40, 200),
            n_covariates: 6,
            used_covariates: 2,
            covariates_predictive: true,
            hist_misleading: false,
            true_new_rate: 0.20,
            true_effect: 0.3,
            n_trt: None,
            target_hist_mean: 0.23,
            target_hist_range: (0.12, 0.38),
            hist_seed: 2024,
            x_new: None,
        }
    }
}

impl ScenarioConfig {
    /// Preset for scenario 1 (ideal), 2 (covariates only), 3 (history only) or 4 (worst).
    pub fn scenario(id: u8) -> Result<Self> {
        let (predictive, misleading) = match id {
            1 => (true, false),
            2 => (true, true),
            3 => (false, false),
            4 => (false, true),
            _ => return Err(Error::InvalidConfig(format!("scenario must be 1-4, got {id}"))),
        };
        Ok(ScenarioConfig {
            covariates_predictive: predictive,
            hist_misleading: misleading,
            true_new_rate: if misleading { 0.45 } else { 0.20 },
            ..ScenarioConfig::default()
        })
    }

    pub fn scenario_id(&self) -> u8 {
        match (self.covariates_predictive, self.hist_misleading) {
            (true, false) => 1,
            (true, true) => 2,
            (false, false) => 3,
            (false, true) => 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        let (lo, hi) = self.hist_size_range;
        if self.n_hist_trials < 2 || lo == 0 || lo > hi {
            return fail(format!(
                "need at least 2 historical trials and 0 < min size <= max size, got {} trials, sizes {lo}-{hi}",
                self.n_hist_trials
            ));
        }
        if self.used_covariates == 0 || self.used_covariates > self.n_covariates {
            return fail(format!(
                "need 1 <= used_covariates <= n_covariates, got {} of {}",
                self.used_covariates, self.n_covariates
            ));
        }
        let (rlo, rhi) = self.target_hist_range;
        let rate_ok = |p: f64| p > 0.0 && p < 1.0;
        if !(rate_ok(rlo) && rate_ok(rhi) && rlo < self.target_hist_mean && self.target_hist_mean < rhi) {
            return fail(format!(
                "need 0 < range min < mean < range max < 1, got {rlo}, {}, {rhi}",
                self.target_hist_mean
            ));
        }
        if !(0.0..=1.0).contains(&self.true_new_rate) {
            return fail(format!("true_new_rate must be in [0, 1], got {}", self.true_new_rate));
        }
        if !(0.0..=1.0).contains(&(self.true_new_rate + self.true_effect)) {
            return fail("treatment rate true_new_rate + true_effect must be in [0, 1]".into());
        }
        if let Some(x) = &self.x_new {
            if x.len() != self.used_covariates || x.iter().any(|v| !v.is_finite()) {
                return fail(format!("x_new must hold {} finite values", self.used_covariates));
            }
        }
        Ok(())
    }

    fn beta_star(&self) -> Vec<f64> {
        (0..self.n_covariates)
            .map(|j| BETA_STAR.get(j).copied().unwrap_or(BETA_TAIL))
            .collect()
    }
}

/// A generated historical data set together with its generating truth.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoricalWorld {
    /// Raw-scale data as the model sees it: intercept plus the used covariates.
    pub dataset: Dataset,
    /// All covariates per trial, after any permutation.
    pub covariates: Vec<Vec<f64>>,
    /// True historical control rates.
    pub true_rates: Vec<f64>,
    /// `logit(rate) = offset + scale * eta` maps the linear predictor to rates.
    pub offset: f64,
    pub scale: f64,
}

impl HistoricalWorld {
    pub fn observed_rates(&self) -> Vec<f64> {
        self.dataset.historical.iter().map(|t| t.rate()).collect()
    }
}

/// Historical data set for `sc`, fully determined by `hist_seed`.
///
/// Scenarios sharing the covariate flag share the data: the permuted version
/// is derived from the predictive one.
pub fn gen_historical(sc: &ScenarioConfig) -> Result<Dataset> {
    Ok(gen_world(sc)?.dataset)
}

pub fn gen_world(sc: &ScenarioConfig) -> Result<HistoricalWorld> {
    sc.validate()?;
    let mut rng = stream(sc.hist_seed, &[tag::HISTORICAL]);
    let h = sc.n_hist_trials;
    let sizes: Vec<u32> = (0..h)
        .map(|_| rng.random_range(sc.hist_size_range.0..=sc.hist_size_range.1))
        .collect();
    let mut covariates: Vec<Vec<f64>> = (0..h)
        .map(|_| {
            (0..sc.n_covariates)
                .map(|j| {
                    if j == 0 {
                        f64::from(u8::from(rng.random::<bool>()))
                    } else {
                        normal(&mut rng, 0.0, 1.0)
                    }
                })
                .collect()
        })
        .collect();
    let beta = sc.beta_star();
    let eta: Vec<f64> = covariates
        .iter()
        .map(|c| dot(&beta, c) + normal(&mut rng, 0.0, NOISE_SD))
        .collect();
    let (offset, scale) = calibrate(&eta, sc.target_hist_mean, sc.target_hist_range.1 - sc.target_hist_range.0)?;
    let true_rates: Vec<f64> = eta.iter().map(|e| inv_logit(offset + scale * e)).collect();

    let responders = draw_responders(&mut rng, &sizes, &true_rates, sc.target_hist_mean)?;
    let observed: Vec<f64> = responders
        .iter()
        .zip(&sizes)
        .map(|(y, n)| f64::from(*y) / f64::from(*n))
        .collect();

    let x_new_full = if sc.covariates_predictive {
        predictive_x_new(&covariates, &beta, offset, scale, sc.true_new_rate)?
    } else {
        permute_rows(&mut covariates, &observed, sc.hist_seed)?;
        column_means(&covariates)
    };

    let visible = |c: &[f64]| -> Vec<f64> {
        std::iter::once(1.0)
            .chain(c[..sc.used_covariates].iter().copied())
            .collect()
    };
    let historical = (0..h)
        .map(|i| TrialSummary::new(format!("hist{:02}", i + 1), sizes[i], responders[i], visible(&covariates[i])))
        .collect::<Result<Vec<_>>>()?;
    let x_new = match &sc.x_new {
        Some(x) => std::iter::once(1.0).chain(x.iter().copied()).collect(),
        None => visible(&x_new_full),
    };
    let dataset = Dataset::new(
        historical,
        NewTrial {
            id: "new".into(),
            x: x_new,
            outcome: None,
        },
    )?;
    Ok(HistoricalWorld {
        dataset,
        covariates,
        true_rates,
        offset,
        scale,
    })
}

/// New-trial control data: `y ~ Binomial(n, rate)` as a sum of Bernoulli draws.
///
/// The draws form one patient stream per seed, so a prefix of length `n1`
/// is the Stage-1 data of a trial whose first `n` patients this call returns.
pub fn gen_new_trial(rate: f64, n: u32, x_new: &[f64], seed: u64) -> Result<NewTrial> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Domain(format!("rate must be in [0, 1], got {rate}")));
    }
    let y = responders(rate, n, seed);
    Ok(NewTrial {
        id: "new".into(),
        x: x_new.to_vec(),
        outcome: Some(crate::model::Outcome { y, n }),
    })
}

/// Responders among the first `n` patients of the stream keyed by `seed`.
pub fn responders(rate: f64, n: u32, seed: u64) -> u32 {
    let mut rng = stream(seed, &[tag::NEW_DATA]);
    (0..n).map(|_| u32::from(rng.random::<f64>() < rate)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn column_means(rows: &[Vec<f64>]) -> Vec<f64> {
    (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64)
        .collect()
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Pearson correlation of each covariate column with `rates`.
pub fn covariate_correlations(covariates: &[Vec<f64>], rates: &[f64]) -> Vec<f64> {
    (0..covariates[0].len())
        .map(|j| {
            let col: Vec<f64> = covariates.iter().map(|r| r[j]).collect();
            correlation(&col, rates)
        })
        .collect()
}

/// Affine map on the logit scale giving rates with the target mean and span.
fn calibrate(eta: &[f64], target_mean: f64, target_span: f64) -> Result<(f64, f64)> {
    let offset_for = |scale: f64| {
        let (mut lo, mut hi) = (-30.0, 30.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let m = eta.iter().map(|e| inv_logit(mid + scale * e)).sum::<f64>() / eta.len() as f64;
            if m < target_mean {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let span_for = |scale: f64| {
        let a = offset_for(scale);
        let rates: Vec<f64> = eta.iter().map(|e| inv_logit(a + scale * e)).collect();
        let max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    };
    let (mut lo, mut hi) = (0.0, 50.0);
    if span_for(hi) < target_span {
        return Err(Error::Runtime("cannot calibrate historical rates to the target range".into()));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if span_for(mid) < target_span {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let scale = 0.5 * (lo + hi);
    Ok((offset_for(scale), scale))
}

/// Binomial responders, redrawn until the observed rates match the published summary.
fn draw_responders(rng: &mut SpxRng, sizes: &[u32], rates: &[f64], target_mean: f64) -> Result<Vec<u32>> {
    for _ in 0..MAX_ATTEMPTS {
        let y: Vec<u32> = sizes
            .iter()
            .zip(rates)
            .map(|(&n, &p)| (0..n).map(|_| u32::from(rng.random::<f64>() < p)).sum())
            .collect();
        let obs: Vec<f64> = y.iter().zip(sizes).map(|(y, n)| f64::from(*y) / f64::from(*n)).collect();
        let min = obs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = obs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if (mean(&obs) - target_mean).abs() <= MEAN_TOL && min >= OBSERVED_RANGE.0 && max <= OBSERVED_RANGE.1 {
            return Ok(y);
        }
    }
    Err(Error::Runtime("could not match the target historical rate summary".into()))
}

/// Covariates at which the generating model gives `rate`: the binary covariate
/// is chosen and the first continuous one solved for, the rest at their means.
fn predictive_x_new(covariates: &[Vec<f64>], beta: &[f64], offset: f64, scale: f64, rate: f64) -> Result<Vec<f64>> {
    let means = column_means(covariates);
    if beta.len() < 2 {
        let mut x = means;
        x[0] = 1.0;
        return Ok(x);
    }
    let target_eta = (logit(rate)? - offset) / scale;
    let rest: f64 = (2..beta.len()).map(|j| beta[j] * means[j]).sum();
    let best = [0.0, 1.0]
        .into_iter()
        .map(|c1| {
            let c2 = (target_eta - beta[0] * c1 - rest) / beta[1];
            (c1, c2)
        })
        .min_by(|a, b| (a.1 - means[1]).abs().total_cmp(&(b.1 - means[1]).abs()))
        .expect("two candidates");
    let mut x = means;
    x[0] = best.0;
    x[1] = best.1;
    Ok(x)
}

/// Shuffle covariate rows across trials until no covariate tracks the rates.
fn permute_rows(covariates: &mut [Vec<f64>], rates: &[f64], seed: u64) -> Result<()> {
    let mut rng = stream(seed, &[tag::PERMUTATION]);
    let original = covariates.to_vec();
    let mut idx: Vec<usize> = (0..covariates.len()).collect();
    for _ in 0..MAX_ATTEMPTS {
        idx.shuffle(&mut rng);
        let permuted: Vec<Vec<f64>> = idx.iter().map(|&i| original[i].clone()).collect();
        let corr = covariate_correlations(&permuted, rates);
        if corr.iter().all(|r| r.abs() < PERMUTED_MAX_CORR) {
            covariates.clone_from_slice(&permuted);
            return Ok(());
        }
    }
    Err(Error::Runtime("no covariate permutation decorrelates the rates".into()))
}
