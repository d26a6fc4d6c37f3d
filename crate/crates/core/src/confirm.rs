//! Upper bound on the probability that a pivot block is overtaken by a
//! sibling subtree grown by an attacker holding a fraction `q` of the
//! block generation rate.
//!
//! With `d = n - m` and `K ~ Poisson(q * lambda_h * t)` the attacker's block
//! count, the bound is `sum_{k=0}^{d} P(K=k) q^(d-k+1) + P(K > d)`.

use statrs::distribution::{Discrete, DiscreteCDF, Poisson};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfirmationParams {
    /// Blocks in the subtree of the block in question.
    pub n: u64,
    /// Blocks in the subtree of its competing sibling.
    pub m: u64,
    /// Attacker share of block generation.
    pub q: f64,
    /// Honest blocks per second.
    pub lambda_h: f64,
    /// Seconds elapsed.
    pub t: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvalidParams {
    #[error("q must lie in [0, 1], got {0}")]
    Q(f64),
    #[error("lambda_h must be positive and finite, got {0}")]
    Lambda(f64),
    #[error("t must be non-negative and finite, got {0}")]
    Time(f64),
    #[error("n ({n}) must be at least m ({m})")]
    Counts { n: u64, m: u64 },
}

impl ConfirmationParams {
    pub fn validate(&self) -> Result<(), InvalidParams> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(InvalidParams::Q(self.q));
        }
        if !(self.lambda_h > 0.0 && self.lambda_h.is_finite()) {
            return Err(InvalidParams::Lambda(self.lambda_h));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(InvalidParams::Time(self.t));
        }
        if self.n < self.m {
            return Err(InvalidParams::Counts { n: self.n, m: self.m });
        }
        Ok(())
    }
}

pub fn pr_drop(p: &ConfirmationParams) -> Result<f64, InvalidParams> {
    p.validate()?;
    let d = p.n - p.m;
    let mean = p.q * p.lambda_h * p.t;
    if mean == 0.0 {
        // All Poisson mass at zero.
        return Ok(p.q.powf(d as f64 + 1.0).clamp(0.0, 1.0));
    }
    let k_dist = Poisson::new(mean).expect("positive mean");
    let mut sum = 0.0;
    for k in 0..=d {
        let pmf = k_dist.pmf(k);
        if pmf > 0.0 {
            sum += pmf * p.q.powf((d - k + 1) as f64);
        }
    }
    sum += k_dist.sf(d);
    Ok(sum.clamp(0.0, 1.0))
}
