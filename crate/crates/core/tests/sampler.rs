use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, Continuous, ContinuousCDF};
use statrs::statistics::Distribution as _;

use spx_core::design::{effect_draws, ess_from_values, posterior_exceedance, TreatmentSummary};
use spx_core::inference::{
    fit_conjugate, fit_rmap, fit_spx, mean, sample_rmap_prior, sample_spx_prior, summarize_values, variance,
    ConjugatePrior, McmcConfig, RmapParams,
};
use spx_core::io::case_study;
use spx_core::model::{inv_logit, Dataset, LikelihoodMode, NewTrial, Outcome, ParameterState, SpxHyperParams};

fn case(y: u32, n: u32) -> Dataset {
    let nt = NewTrial {
        id: "new".into(),
        x: vec![1.0, 1.0, 53.0],
        outcome: Some(Outcome::new(y, n).unwrap()),
    };
    case_study().dataset(Some(nt)).unwrap().0
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

fn prior_mc() -> McmcConfig {
    McmcConfig {
        chains: 4,
        burn_in: 5000,
        samples: 2500,
        thin: 20,
        keep_params: true,
        likelihood: LikelihoodMode::PriorOnly,
        seed: 11,
        ..McmcConfig::analysis()
    }
}

#[test]
fn spx_prior_marginals_match_forward_draws() {
    let d = case(22, 75);
    let hp = SpxHyperParams::default();
    let params = fit_spx(&d, &hp, &prior_mc()).unwrap().full_params.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let prior: Vec<_> = (0..20_000).map(|_| sample_spx_prior(&d, &hp, &mut rng).unwrap()).collect();
    let marginals: [(&str, fn(&ParameterState) -> f64); 6] = [
        ("tau", |s| s.tau),
        ("sigma", |s| s.sigma),
        ("beta0", |s| s.beta[0]),
        ("beta2", |s| s.beta[2]),
        ("theta_1", |s| s.theta_trials[0]),
        ("psi_new", |s| inv_logit(s.theta_new())),
    ];
    for (name, g) in marginals {
        let a: Vec<f64> = params.iter().map(g).collect();
        let b: Vec<f64> = prior.iter().map(g).collect();
        let (stat, crit) = ks(&a, &b);
        assert!(stat < crit, "{name}: D = {stat:.4} >= {crit:.4}");
    }
}

#[test]
fn rmap_prior_marginals_match_forward_draws() {
    let d = case(22, 75);
    let rp = RmapParams::default();
    let draws = fit_rmap(&d, &rp, &prior_mc()).unwrap();
    let trace = draws.trace.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let prior: Vec<_> = (0..20_000).map(|_| sample_rmap_prior(d.n_hist(), &rp, &mut rng)).collect();
    let pairs = [
        ("mu", trace["mu"].clone(), prior.iter().map(|s| s.mu).collect::<Vec<_>>()),
        ("tau", trace["tau"].clone(), prior.iter().map(|s| s.tau).collect()),
        ("psi_new", draws.psi_new, prior.iter().map(|s| inv_logit(s.theta_new())).collect()),
    ];
    for (name, a, b) in pairs {
        let (stat, crit) = ks(&a, &b);
        assert!(stat < crit, "{name}: D = {stat:.4} >= {crit:.4}");
    }
}

#[test]
fn without_new_data_the_weights_equal_the_prior() {
    let d = case(22, 75);
    let hp = SpxHyperParams::default();
    let mc = McmcConfig {
        likelihood: LikelihoodMode::HistoricalOnly,
        ..McmcConfig::fast()
    };
    let draws = fit_spx(&d, &hp, &mc).unwrap();
    for (w, p) in draws.rb_weights.iter().zip(hp.prior_probs()) {
        assert!((w - p).abs() < 1e-12, "{:?}", draws.rb_weights);
    }
}

#[test]
fn rmap_without_map_component_is_conjugate() {
    let d = case(22, 75);
    let rp = RmapParams {
        mix_weight: 0.0,
        ..RmapParams::default()
    };
    let draws = fit_rmap(&d, &rp, &McmcConfig::fast().with_seed(3)).unwrap();
    let exact = Beta::new(23.0, 54.0).unwrap();
    let se = (exact.variance().unwrap() / draws.len() as f64).sqrt();
    assert!((draws.mean() - exact.mean().unwrap()).abs() < 4.0 * se);
    assert_eq!(draws.rb_weights, [0.0, 0.0, 1.0]);
}

#[test]
fn rmap_pools_toward_the_historical_mean() {
    let hist_mean = {
        let t = case_study();
        let (y, n) = t.trials.iter().fold((0, 0), |(y, n), t| (y + t.y, n + t.n));
        f64::from(y) / f64::from(n)
    };
    let rp = RmapParams {
        mix_weight: 1.0,
        ..RmapParams::default()
    };
    for y in [12, 30] {
        let d = case(y, 75);
        let m = fit_rmap(&d, &rp, &McmcConfig::fast()).unwrap().mean();
        let observed = f64::from(y) / 75.0;
        let (lo, hi) = if observed < hist_mean { (observed, hist_mean) } else { (hist_mean, observed) };
        assert!(lo < m && m < hi, "y = {y}: mean {m:.3} outside ({lo:.3}, {hi:.3})");
    }
}

#[test]
fn borrowing_weight_falls_with_conflict() {
    let hp = SpxHyperParams::default();
    let borrow: Vec<f64> = [22, 30, 38]
        .iter()
        .map(|&y| {
            let w = fit_spx(&case(y, 75), &hp, &McmcConfig::fast()).unwrap().rb_weights;
            w[0] + w[1]
        })
        .collect();
    assert!(borrow.windows(2).all(|w| w[0] > w[1]), "{borrow:?}");
}

#[test]
fn spx_shrinks_toward_history() {
    let hp = SpxHyperParams::default();
    for (y, seed) in [(12, 1), (15, 2), (18, 3)] {
        let d = case(y, 75);
        let mc = McmcConfig::fast().with_seed(seed);
        let spx = fit_spx(&d, &hp, &mc).unwrap().mean();
        let ind = fit_conjugate(Outcome::new(y, 75).unwrap(), ConjugatePrior::Uniform, &mc).unwrap().mean();
        assert!(spx >= ind, "y = {y}: spx {spx:.4} < independent {ind:.4}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let d = case(22, 75);
    let mc = McmcConfig {
        chains: 3,
        burn_in: 300,
        samples: 300,
        ..McmcConfig::analysis()
    };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| fit_spx(&d, &SpxHyperParams::default(), &mc).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn summary_matches_beta_quantiles() {
    let outcome = Outcome::new(29, 98).unwrap();
    let mc = McmcConfig {
        chains: 1,
        samples: 200_000,
        ..McmcConfig::analysis()
    };
    let draws = fit_conjugate(outcome, ConjugatePrior::Uniform, &mc).unwrap();
    let s = summarize_values(&draws.psi_new, 0.95).unwrap();
    let exact = Beta::new(30.0, 70.0).unwrap();
    assert!((s.mean - 0.3).abs() < 4.0 * (exact.variance().unwrap() / 2e5).sqrt());
    assert!((s.lower - exact.inverse_cdf(0.025)).abs() < 2e-3);
    assert!((s.upper - exact.inverse_cdf(0.975)).abs() < 2e-3);
    let ess = ess_from_values(&draws.psi_new, 0).unwrap();
    assert!((ess - 100.0).abs() < 2.0, "{ess}");
}

#[test]
fn effect_exceedance_matches_quadrature() {
    let control = fit_conjugate(Outcome::new(20, 80).unwrap(), ConjugatePrior::Uniform, &McmcConfig::fast()).unwrap();
    let t = TreatmentSummary::new(40, 90).unwrap();
    let margin = 0.1;
    let deltas = effect_draws(&control, t, 200_000, 17).unwrap();
    let p = posterior_exceedance(&deltas, margin).unwrap();

    let ctl = Beta::new(21.0, 61.0).unwrap();
    let trt = Beta::new(40.5, 50.5).unwrap();
    let steps = 20_000;
    let h = 1.0 / steps as f64;
    let exact: f64 = (0..steps)
        .map(|i| {
            let c = (i as f64 + 0.5) * h;
            ctl.pdf(c) * (1.0 - trt.cdf((c + margin).min(1.0))) * h
        })
        .sum();
    // the control sample is finite, so allow its sampling error on top of the effect draws'
    let se = (exact * (1.0 - exact) / control.len() as f64).sqrt();
    assert!((p - exact).abs() < 4.0 * se, "{p} vs {exact}");
}

#[test]
fn superiority_probability_matches_quadrature() {
    let control = fit_conjugate(Outcome::new(22, 75).unwrap(), ConjugatePrior::Uniform, &McmcConfig::fast()).unwrap();
    let deltas = effect_draws(&control, TreatmentSummary::new(45, 75).unwrap(), 100_000, 4).unwrap();
    let p = posterior_exceedance(&deltas, 0.0).unwrap();
    let ctl = Beta::new(23.0, 54.0).unwrap();
    let trt = Beta::new(45.5, 30.5).unwrap();
    let steps = 20_000;
    let h = 1.0 / steps as f64;
    let exact: f64 = (0..steps)
        .map(|i| {
            let c = (i as f64 + 0.5) * h;
            ctl.pdf(c) * (1.0 - trt.cdf(c)) * h
        })
        .sum();
    assert!((p - exact).abs() < 0.005, "{p} vs {exact}");
}

#[test]
fn jeffreys_and_uniform_differ_by_prior_mass() {
    let o = Outcome::new(0, 75).unwrap();
    let mc = McmcConfig {
        chains: 1,
        samples: 100_000,
        ..McmcConfig::analysis()
    };
    let u = fit_conjugate(o, ConjugatePrior::Uniform, &mc).unwrap();
    let j = fit_conjugate(o, ConjugatePrior::Jeffreys, &mc).unwrap();
    assert!((mean(&u.psi_new) - 1.0 / 77.0).abs() < 3e-4);
    assert!((mean(&j.psi_new) - 0.5 / 76.0).abs() < 3e-4);
    assert!(variance(&j.psi_new) < variance(&u.psi_new));
}
