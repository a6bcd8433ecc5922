//! Replicated trials and their Frequentist operating characteristics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{gen_historical, responders, ScenarioConfig};
use crate::design::{
    complete_trial, ess_moment_match, run_adaptive_trial, stage2_size, DesignConfig, TreatmentSummary,
};
use crate::error::{Error, Result};
use crate::inference::{self, summarize, McmcConfig, Method, ModelSettings};
use crate::model::{Dataset, Outcome};
use crate::rng::{derive_seed, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Fixed,
    Adaptive,
}

impl DesignKind {
    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Fixed => "fixed",
            DesignKind::Adaptive => "adaptive",
        }
    }
}

impl std::str::FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(DesignKind::Fixed),
            "adaptive" => Ok(DesignKind::Adaptive),
            _ => Err(Error::InvalidConfig(format!("unknown design '{s}' (expected fixed or adaptive)"))),
        }
    }
}

/// Outcome of one simulated trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    /// Interim effective sample size (adaptive designs only).
    pub ess: Option<f64>,
    pub control_n: u32,
    pub control_y: u32,
    pub post_mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub covered: bool,
    /// Posterior P(delta > 0) for the arm without an effect.
    pub p_positive_null: f64,
    pub type1: bool,
    /// Posterior P(delta > delta0) for the arm with the true effect.
    pub p_clinical_alt: f64,
    pub power: bool,
    pub rb_weights: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingCharacteristics {
    pub mean_size: f64,
    pub rmse: f64,
    /// Percent of 95% intervals covering the true rate.
    pub coverage: f64,
    pub width: f64,
    /// Percent of null-effect trials declared positive.
    pub type1: f64,
    /// Percent of true-effect trials declared clinically significant.
    pub power: f64,
    pub mean_rb_weights: [f64; 3],
    pub n_replicates: usize,
}

impl OperatingCharacteristics {
    /// Aggregate replicate records in index order.
    pub fn from_records(records: &[ReplicateRecord], true_rate: f64) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Degenerate("no replicates to aggregate".into()));
        }
        let r = records.len() as f64;
        let pct = |f: fn(&ReplicateRecord) -> bool| 100.0 * records.iter().filter(|x| f(x)).count() as f64 / r;
        let mut rb = [0.0; 3];
        for rec in records {
            for k in 0..3 {
                rb[k] += rec.rb_weights[k] / r;
            }
        }
        Ok(OperatingCharacteristics {
            mean_size: records.iter().map(|x| f64::from(x.control_n)).sum::<f64>() / r,
            rmse: (records.iter().map(|x| (x.post_mean - true_rate).powi(2)).sum::<f64>() / r).sqrt(),
            coverage: pct(|x| x.covered),
            width: records.iter().map(|x| x.upper - x.lower).sum::<f64>() / r,
            type1: pct(|x| x.type1),
            power: pct(|x| x.power),
            mean_rb_weights: rb,
            n_replicates: records.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario_id: u8,
    pub method: Method,
    pub design: DesignKind,
    pub n_max: u32,
    pub true_rate: f64,
    pub master_seed: u64,
    pub oc: OperatingCharacteristics,
    pub records: Vec<ReplicateRecord>,
}

/// Everything fixed across the replicates of one scenario run.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub scenario: ScenarioConfig,
    pub method: Method,
    pub design: DesignKind,
    pub dc: DesignConfig,
    pub settings: ModelSettings,
    pub mc: McmcConfig,
}

pub fn run_scenario(setup: &SimSetup, n_replicates: usize, master_seed: u64) -> Result<ScenarioResult> {
    let historical = gen_historical(&setup.scenario)?;
    run_scenario_on(setup, &historical, n_replicates, master_seed)
}

/// As [`run_scenario`], on an already generated raw-scale historical data set.
pub fn run_scenario_on(
    setup: &SimSetup,
    historical: &Dataset,
    n_replicates: usize,
    master_seed: u64,
) -> Result<ScenarioResult> {
    setup.scenario.validate()?;
    setup.dc.validate()?;
    setup.mc.validate()?;
    setup.settings.spx.validate()?;
    setup.settings.rmap.validate()?;
    if n_replicates == 0 {
        return Err(Error::InvalidConfig("at least one replicate is required".into()));
    }
    let (data, _) = historical.standardized();
    let records = (0..n_replicates)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(master_seed, &[tag::REPLICATE, i as u64]);
            run_replicate(setup, &data, i, seed).map_err(|e| Error::Replicate {
                replicate: i,
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let true_rate = setup.scenario.true_new_rate;
    Ok(ScenarioResult {
        scenario_id: setup.scenario.scenario_id(),
        method: setup.method,
        design: setup.design,
        n_max: setup.dc.n_max,
        true_rate,
        master_seed,
        oc: OperatingCharacteristics::from_records(&records, true_rate)?,
        records,
    })
}

/// One simulated trial. Data streams depend only on `seed`, never on the
/// method or design, so methods compared under one master seed see the same patients.
pub fn run_replicate(setup: &SimSetup, data: &Dataset, replicate: usize, seed: u64) -> Result<ReplicateRecord> {
    let sc = &setup.scenario;
    let dc = &setup.dc;
    let rate = sc.true_new_rate;
    let patients = derive_seed(seed, &[tag::NEW_DATA]);
    let fit_mc = |t: u64| setup.mc.with_seed(derive_seed(seed, &[t]));

    let (ess, control_n) = match setup.design {
        DesignKind::Fixed => (None, dc.n_max),
        DesignKind::Adaptive => {
            let y1 = responders(rate, dc.n_stage1, patients);
            let interim = data.with_outcome(Outcome::new(y1, dc.n_stage1)?);
            let (plan, _) = run_adaptive_trial(&interim, setup.method, &setup.settings, dc, &fit_mc(tag::INTERIM_FIT))?;
            (Some(plan.ess), plan.total)
        }
    };
    let control_y = responders(rate, control_n, patients);
    let full = data.with_outcome(Outcome::new(control_y, control_n)?);

    let n_trt = sc.n_trt.unwrap_or(dc.n_max);
    let trt_seed = derive_seed(seed, &[tag::TREATMENT]);
    let y_null = responders(rate, n_trt, derive_seed(trt_seed, &[0]));
    let y_alt = responders(rate + sc.true_effect, n_trt, derive_seed(trt_seed, &[1]));

    let final_mc = fit_mc(tag::FINAL_FIT);
    let (null_decision, draws) = complete_trial(
        &full,
        setup.method,
        &setup.settings,
        dc,
        &final_mc,
        TreatmentSummary::new(y_null, n_trt)?,
        derive_seed(seed, &[tag::EFFECT, 0]),
    )?;
    let alt_decision = crate::design::decide_trial(
        &draws,
        TreatmentSummary::new(y_alt, n_trt)?,
        dc,
        derive_seed(seed, &[tag::EFFECT, 1]),
    )?;
    let summary = summarize(&draws, 0.95)?;
    Ok(ReplicateRecord {
        replicate,
        seed,
        ess,
        control_n,
        control_y,
        post_mean: summary.mean,
        lower: summary.lower,
        upper: summary.upper,
        covered: summary.covers(rate),
        p_positive_null: null_decision.p_positive,
        type1: null_decision.positive,
        p_clinical_alt: alt_decision.p_clinical,
        power: alt_decision.clinical,
        rb_weights: draws.rb_weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub observed_rate: f64,
    pub y: u32,
    pub n: u32,
    pub rb_weights: [f64; 3],
    pub ess: f64,
    pub stage2_total: u32,
}

/// Fit each hypothetical interim outcome `round(rate * n_fixed) / n_fixed` and
/// record the submodel weights and the resulting total control size.
///
/// Every grid point uses the same MCMC seed so the curve is smooth in the rate.
pub fn sweep_observed_rate(
    dataset: &Dataset,
    method: Method,
    settings: &ModelSettings,
    grid: &[f64],
    n_fixed: u32,
    dc: &DesignConfig,
    mc: &McmcConfig,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    dc.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grid is empty".into()));
    }
    if grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::InvalidConfig("sweep rates must lie in [0, 1]".into()));
    }
    let fit_mc = mc.with_seed(derive_seed(seed, &[tag::SWEEP]));
    grid.par_iter()
        .map(|&rate| {
            let y = (rate * f64::from(n_fixed)).round() as u32;
            let d = dataset.with_outcome(Outcome::new(y, n_fixed)?);
            let draws = inference::fit(method, &d, settings, &fit_mc)?;
            let ess = ess_moment_match(&draws, n_fixed)?;
            Ok(SweepRow {
                observed_rate: rate,
                y,
                n: n_fixed,
                rb_weights: draws.rb_weights,
                ess,
                stage2_total: dc.n_stage1 + stage2_size(ess, dc),
            })
        })
        .collect()
}

/// Evenly spaced grid from `start` to `end` inclusive, rounded to 1e-9.
pub fn rate_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || end < start {
        return Err(Error::InvalidConfig("rate grid needs step > 0 and end >= start".into()));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(method: Method, design: DesignKind, scenario: u8) -> SimSetup {
        SimSetup {
            scenario: ScenarioConfig::scenario(scenario).unwrap(),
            method,
            design,
            dc: DesignConfig::with_n_max(100),
            settings: ModelSettings::default(),
            mc: McmcConfig {
                burn_in: 300,
                samples: 300,
                ..McmcConfig::fast()
            },
        }
    }

    #[test]
    fn single_replicate_aggregation() {
        let r = run_scenario(&setup(Method::Independent, DesignKind::Fixed, 1), 1, 5).unwrap();
        let oc = r.oc;
        for p in [oc.coverage, oc.type1, oc.power] {
            assert!(p == 0.0 || p == 100.0);
        }
        let rec = &r.records[0];
        assert!((oc.rmse - (rec.post_mean - 0.2).abs()).abs() < 1e-15);
        assert_eq!(oc.mean_size, 100.0);
    }

    #[test]
    fn empty_records_rejected() {
        assert!(OperatingCharacteristics::from_records(&[], 0.2).is_err());
        assert!(run_scenario(&setup(Method::Independent, DesignKind::Fixed, 1), 0, 5).is_err());
    }

    #[test]
    fn adaptive_sizes_within_band() {
        let r = run_scenario(&setup(Method::Spx, DesignKind::Adaptive, 1), 6, 11).unwrap();
        for rec in &r.records {
            assert!((75..=125).contains(&rec.control_n));
            assert!(rec.ess.is_some());
        }
        let again = run_scenario(&setup(Method::Spx, DesignKind::Adaptive, 1), 6, 11).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn methods_share_patients() {
        let a = run_scenario(&setup(Method::Independent, DesignKind::Fixed, 3), 4, 2).unwrap();
        let b = run_scenario(&setup(Method::Rmap, DesignKind::Fixed, 3), 4, 2).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!((x.control_y, x.control_n), (y.control_y, y.control_n));
        }
    }

    #[test]
    fn grid_construction() {
        let g = rate_grid(0.10, 0.50, 0.02).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.10);
        assert_eq!(g[20], 0.50);
        assert!(rate_grid(0.5, 0.1, 0.02).is_err());
    }
}
