use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extra clients drawn beyond `K`, split between the sticky and fresh pools.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvercommitPlan {
    pub oc: f64,
    pub f_sticky: f64,
    pub extra_sticky: usize,
    pub extra_fresh: usize,
}

impl OvercommitPlan {
    pub fn extra_total(&self) -> usize {
        self.extra_sticky + self.extra_fresh
    }
}

/// `round((oc-1)K)` extra draws, of which `round((oc-1)K f_sticky)` go to
/// the sticky group. `f_sticky` defaults to `C/K`.
pub fn plan_overcommit(k: usize, c: usize, oc: f64, f_sticky: Option<f64>) -> Result<OvercommitPlan> {
    if !(oc >= 1.0 && oc.is_finite()) {
        return Err(Error::invalid(format!("over-commitment {oc} must be at least 1")));
    }
    if k == 0 || c > k {
        return Err(Error::invalid("need k >= 1 and c <= k"));
    }
    let f_sticky = f_sticky.unwrap_or(c as f64 / k as f64);
    if !(0.0..=1.0).contains(&f_sticky) {
        return Err(Error::invalid(format!("f_sticky {f_sticky} outside [0, 1]")));
    }
    let extra = (oc - 1.0) * k as f64;
    let total = extra.round() as usize;
    let extra_sticky = ((extra * f_sticky).round() as usize).min(total);
    Ok(OvercommitPlan { oc, f_sticky, extra_sticky, extra_fresh: total - extra_sticky })
}
