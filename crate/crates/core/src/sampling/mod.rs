//! Uniform and sticky client sampling, inverse-propensity aggregation
//! weights, and closed-form calculators for re-sampling probabilities and
//! the convergence-rate variance factor.

mod sticky;
mod theory;
mod weights;

pub use sticky::{sample_groups, sample_round, update_sticky_group, RoundDraw, StickyState};
pub use theory::{expected_resample_interval, resample_probability, theory_constants, Scheme, TheoryConstants};
pub use weights::{aggregation_weight, GroupTag};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Population `n`, per-round sample `k`, sticky group size `s` and sticky
/// draws per round `c`. Uniform sampling is `s = c = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub c: usize,
}

impl SamplingParams {
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        let p = Self { n, k, s: 0, c: 0 };
        p.validate()?;
        Ok(p)
    }

    pub fn sticky(n: usize, k: usize, s: usize, c: usize) -> Result<Self> {
        let p = Self { n, k, s, c };
        p.validate()?;
        if p.is_uniform() {
            return Err(Error::invalid("sticky sampling needs s > 0 and c > 0"));
        }
        Ok(p)
    }

    pub fn is_uniform(&self) -> bool {
        self.s == 0 && self.c == 0
    }

    pub fn validate(&self) -> Result<()> {
        let Self { n, k, s, c } = *self;
        if k == 0 || k > n {
            return Err(Error::invalid(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        if self.is_uniform() {
            return Ok(());
        }
        if !(0 < c && c < k && k <= s && s < n) {
            return Err(Error::invalid(format!(
                "sticky sampling needs 0 < c < k <= s < n, got n={n} k={k} s={s} c={c}"
            )));
        }
        // c/s > k/n, compared without rounding.
        if c * n <= k * s {
            return Err(Error::invalid(format!(
                "sticky sampling needs c/s > k/n, got c/s={} k/n={}",
                c as f64 / s as f64,
                k as f64 / n as f64
            )));
        }
        Ok(())
    }
}
