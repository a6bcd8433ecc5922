//! Logit link and numerically stable helpers.

use crate::error::{Error, Result};

/// Floor applied to probabilities before they enter a binomial log-pmf.
pub const PROB_EPS: f64 = 1e-12;

pub fn logit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("logit requires 0 < p < 1, got {p}")));
    }
    Ok((p / (1.0 - p)).ln())
}

/// Inverse logit, clamped to `[PROB_EPS, 1 - PROB_EPS]`.
pub fn inv_logit(t: f64) -> f64 {
    let p = if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    };
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `ln(1 + e^t)` without overflow.
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `ln(inv_logit(t))`, unclamped.
pub fn ln_inv_logit(t: f64) -> f64 {
    -softplus(-t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logit_examples() {
        assert_eq!(logit(0.5).unwrap(), 0.0);
        assert!((logit(0.24).unwrap() - (-1.1527)).abs() < 1e-4);
        assert!((logit(inv_logit(3.7)).unwrap() - 3.7).abs() < 1e-12);
    }

    #[test]
    fn logit_domain() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(logit(p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn inv_logit_examples() {
        assert_eq!(inv_logit(0.0), 0.5);
        let big = inv_logit(40.0);
        assert!((1.0 - 1e-12..1.0).contains(&big));
        assert!(inv_logit(-40.0) > 0.0);
        assert!((inv_logit(-1.1527) - 0.24).abs() < 1e-4);
    }

    #[test]
    fn round_trip_grid() {
        let mut p = 1e-6;
        while p < 1.0 - 1e-6 {
            let back = inv_logit(logit(p).unwrap());
            assert!((back - p).abs() < 1e-12, "p = {p}");
            p += 1e-3;
        }
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(softplus(800.0), 800.0);
        assert!(softplus(-800.0) >= 0.0);
        assert!((ln_inv_logit(1.3) - inv_logit(1.3).ln()).abs() < 1e-14);
    }
}
