/// Random-walk scale tuned toward a target acceptance rate during burn-in.
#[derive(Debug, Clone)]
pub(crate) struct Proposal {
    log_scale: f64,
    accepted: u64,
    proposed: u64,
}

const TARGET: f64 = 0.44;

impl Proposal {
    pub fn new(scale: f64) -> Self {
        Proposal {
            log_scale: scale.ln(),
            accepted: 0,
            proposed: 0,
        }
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    /// Record one Metropolis step with log acceptance ratio `log_alpha`.
    ///
    /// During burn-in (`adapt_iter = Some(t)`) the log scale follows a
    /// Robbins-Monro recursion; afterwards it is frozen and only acceptance is counted.
    pub fn record(&mut self, log_alpha: f64, accepted: bool, adapt_iter: Option<usize>) {
        match adapt_iter {
            Some(t) => {
                let alpha = if log_alpha >= 0.0 { 1.0 } else { log_alpha.exp() };
                let gain = 1.0 / (1.0 + t as f64).powf(0.6);
                self.log_scale = (self.log_scale + gain * (alpha - TARGET)).clamp(-12.0, 6.0);
            }
            None => {
                self.proposed += 1;
                self.accepted += u64::from(accepted);
            }
        }
    }

    pub fn counts(&self) -> (u64, u64) {
        (self.accepted, self.proposed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_after_burn_in() {
        let mut p = Proposal::new(1.0);
        p.record(0.0, true, Some(0));
        assert!(p.scale() > 1.0);
        let s = p.scale();
        p.record(-10.0, false, None);
        assert_eq!(p.scale(), s);
        assert_eq!(p.counts(), (0, 1));
    }
}
