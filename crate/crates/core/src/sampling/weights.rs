use serde::{Deserialize, Serialize};

use super::SamplingParams;
use crate::error::{Error, Result};

/// Which pool a participant was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupTag {
    Sticky,
    Fresh,
    Uniform,
}

/// Inverse-propensity weight: client weight `p_i` divided by the
/// probability that the client is drawn from its pool this round.
pub fn aggregation_weight(group: GroupTag, p_i: f64, params: &SamplingParams) -> Result<f64> {
    params.validate()?;
    if p_i < 0.0 || !p_i.is_finite() {
        return Err(Error::invalid(format!("client weight {p_i} must be finite and non-negative")));
    }
    let SamplingParams { n, k, s, c } = *params;
    match group {
        GroupTag::Uniform => Ok(n as f64 / k as f64 * p_i),
        _ if params.is_uniform() => Err(Error::invalid("sticky/fresh weights requested under uniform sampling")),
        GroupTag::Sticky => Ok(s as f64 / c as f64 * p_i),
        GroupTag::Fresh => Ok((n - s) as f64 / (k - c) as f64 * p_i),
    }
}
