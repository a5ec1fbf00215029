//! Closed-form re-sampling probabilities and the variance factor / learning
//! rate pair used by the convergence bound.

use serde::{Deserialize, Serialize};

use super::SamplingParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Uniform,
    Sticky,
}

/// Probability that a client sampled in the current round is next sampled
/// exactly `r` rounds later.
///
/// Under sticky sampling every just-sampled client sits in the sticky
/// group. Per round, a member is drawn with probability `C/S`, evicted with
/// probability `(K-C)/S` and otherwise waits; an evicted client is drawn
/// with probability `(K-C)/(N-S)`. Summing the two first-passage paths
/// gives a two-term geometric mixture.
pub fn resample_probability(scheme: Scheme, params: &SamplingParams, r: u32) -> Result<f64> {
    params.validate()?;
    if r < 1 {
        return Err(Error::invalid("rounds skipped must be at least 1"));
    }
    let n = params.n as f64;
    let k = params.k as f64;
    let e = (r - 1) as i32;
    match scheme {
        Scheme::Uniform => Ok(k / n * (1.0 - k / n).powi(e)),
        Scheme::Sticky => {
            if params.is_uniform() {
                return Err(Error::invalid("sticky probability needs sticky parameters"));
            }
            let s = params.s as f64;
            let c = params.c as f64;
            let fresh = k - c;
            let denom = (n - s) * k - fresh * s;
            let stay = k * (n * c - s * k) / s * (1.0 - k / s).powi(e);
            let back = fresh * fresh * (1.0 - fresh / (n - s)).powi(e);
            Ok((stay + back) / denom)
        }
    }
}

/// Mean of the re-sampling distribution, summed in closed form.
pub fn expected_resample_interval(scheme: Scheme, params: &SamplingParams) -> Result<f64> {
    params.validate()?;
    let n = params.n as f64;
    let k = params.k as f64;
    match scheme {
        Scheme::Uniform => Ok(n / k),
        Scheme::Sticky => {
            if params.is_uniform() {
                return Err(Error::invalid("sticky interval needs sticky parameters"));
            }
            let s = params.s as f64;
            let c = params.c as f64;
            let fresh = k - c;
            let denom = (n - s) * k - fresh * s;
            // sum_r r x^(r-1) = 1/(1-x)^2 for each geometric term
            Ok((s * (n * c - s * k) / k + (n - s) * (n - s)) / denom)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    /// Variance factor; exactly 1 for uniform sampling with equal weights.
    pub a: f64,
    /// Learning rate that balances the bound's two terms.
    pub gamma: f64,
}

/// Variance factor `A = (K/N)(S^2/C + (N-S)^2/(K-C)) sum p_i^2` and the matching
/// learning rate `sqrt(K / (E (sigma^2 + E) T A))`. In uniform mode the
/// `S^2/C` term is taken as its limit, zero.
pub fn theory_constants(
    params: &SamplingParams,
    p: &[f64],
    local_steps: u32,
    sigma: f64,
    rounds: u32,
) -> Result<TheoryConstants> {
    if !params.is_uniform() && params.c >= params.k {
        return Err(Error::invalid("c must be below k"));
    }
    params.validate()?;
    if p.len() != params.n {
        return Err(Error::invalid(format!("expected {} client weights, got {}", params.n, p.len())));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 || p.iter().any(|&x| x < 0.0) {
        return Err(Error::invalid(format!("client weights must be non-negative and sum to 1 (sum {total})")));
    }
    if local_steps < 1 || rounds < 1 || sigma < 0.0 {
        return Err(Error::invalid("need E >= 1, T >= 1 and sigma >= 0"));
    }
    let n = params.n as f64;
    let k = params.k as f64;
    let s = params.s as f64;
    let c = params.c as f64;
    // A = [(K/N^2)(S^2/C + (N-S)^2/(K-C))] * [N sum p^2], arranged so both
    // factors are exactly 1 for uniform sampling with equal weights.
    let sticky_term = if params.is_uniform() { 0.0 } else { k * s * s / (n * n * c) };
    let fresh_frac = (n - s) / n;
    let sampling_factor = sticky_term + fresh_frac * fresh_frac * (k / (k - c));
    // N sum p^2 / (sum p)^2 = 1 + (N sum e^2 - (sum e)^2) / (sum p)^2 with e = p - p_0
    let p0 = p[0];
    let (sum_e, sum_e2) = p.iter().fold((0.0, 0.0), |(a, b), &x| (a + (x - p0), b + (x - p0) * (x - p0)));
    let dispersion = 1.0 + (n * sum_e2 - sum_e * sum_e) / (total * total);
    let a = sampling_factor * dispersion;
    let e = local_steps as f64;
    let gamma = (1.0 / (e * (sigma * sigma + e)) * k / (rounds as f64 * a)).sqrt();
    Ok(TheoryConstants { a, gamma })
}
