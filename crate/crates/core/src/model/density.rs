//! Elementary log-densities used by the joint model and the samplers.

use std::f64::consts::PI;

use super::link::{inv_logit, ln_inv_logit};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn normal_lpdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - LN_SQRT_2PI
}

pub fn cauchy_lpdf(x: f64, scale: f64) -> f64 {
    let z = x / scale;
    -(PI * scale).ln() - z.mul_add(z, 1.0).ln()
}

/// Cauchy(0, scale) truncated to `(0, inf)`; `-inf` outside the support.
pub fn half_cauchy_lpdf(x: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    std::f64::consts::LN_2 + cauchy_lpdf(x, scale)
}

/// Log-density on the logit scale of `t` when `inv_logit(t) ~ Beta(0.5, 0.5)`.
///
/// Includes the Jacobian `psi (1 - psi)` of the logit transform.
pub fn jeffreys_logit_lpdf(t: f64) -> f64 {
    0.5 * ln_inv_logit(t) + 0.5 * ln_inv_logit(-t) - PI.ln()
}

/// Logistic(0, 1) log-density, the logit-scale image of Uniform(0, 1).
pub fn logistic_lpdf(t: f64) -> f64 {
    ln_inv_logit(t) + ln_inv_logit(-t)
}

/// Lanczos approximation (g = 7, n = 9), accurate to ~1e-15 for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_choose(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(f64::from(n) + 1.0) - ln_gamma(f64::from(k) + 1.0) - ln_gamma(f64::from(n - k) + 1.0)
}

/// Binomial log-pmf of `y` successes in `n` trials at success probability
/// `inv_logit(theta)`, with the probability clamped away from 0 and 1.
pub fn binomial_logit_lpmf(y: u32, n: u32, theta: f64, ln_choose_ny: f64) -> f64 {
    let p = inv_logit(theta);
    ln_choose_ny + f64::from(y) * p.ln() + f64::from(n - y) * (-p).ln_1p()
}
