//! Small exact samplers shared by the MCMC kernels.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Draw `logit(psi)` for `psi ~ Beta(a, b)` as `ln X - ln Y`, `X ~ Gamma(a)`,
/// `Y ~ Gamma(b)`, which stays finite where `psi` itself would round to 0 or 1.
pub fn logit_beta<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let x: f64 = Gamma::new(a, 1.0).expect("shape > 0").sample(rng);
    let y: f64 = Gamma::new(b, 1.0).expect("shape > 0").sample(rng);
    x.max(f64::MIN_POSITIVE).ln() - y.max(f64::MIN_POSITIVE).ln()
}

/// Cauchy(0, scale) truncated to `(0, inf)` by inversion.
pub fn half_cauchy<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    loop {
        let u: f64 = rng.random();
        let x = scale * (std::f64::consts::FRAC_PI_2 * u).tan();
        if x > 0.0 && x.is_finite() {
            return x;
        }
    }
}

pub fn cauchy<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    loop {
        let u: f64 = rng.random();
        let x = scale * (std::f64::consts::PI * (u - 0.5)).tan();
        if x.is_finite() {
            return x;
        }
    }
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + sd * z
}

/// Logistic(0, 1) draw.
pub fn logistic<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u.ln() - (-u).ln_1p();
        }
    }
}

/// Index drawn from normalized probabilities.
pub fn categorical<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding: fall back to the last index with positive mass
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

/// Normalize log weights with log-sum-exp; `-inf` entries get probability 0.
pub fn normalize_log(log_w: &[f64]) -> Vec<f64> {
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return vec![1.0 / log_w.len() as f64; log_w.len()];
    }
    let raw: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / total).collect()
}
