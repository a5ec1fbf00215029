use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MBPS: f64 = 1e6;

/// Network and compute characteristics of one client.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClientProfile {
    /// bits per second
    pub down_bw: f64,
    /// bits per second
    pub up_bw: f64,
    /// local steps per second
    pub compute_rate: f64,
}

/// A positive-valued distribution: empirical CDF breakpoints interpolated
/// log-linearly, or a lognormal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RateDistribution {
    /// `(cdf_fraction, value)` pairs, both non-decreasing.
    Cdf {
        points: Vec<(f64, f64)>,
    },
    Lognormal {
        mu: f64,
        sigma: f64,
    },
}

impl RateDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            RateDistribution::Cdf { points } => {
                if points.is_empty() {
                    return Err(Error::invalid("cdf needs at least one breakpoint"));
                }
                for &(f, v) in points {
                    if !(0.0..=1.0).contains(&f) || !(v > 0.0 && v.is_finite()) {
                        return Err(Error::invalid(format!("bad cdf breakpoint ({f}, {v})")));
                    }
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 || w[1].1 < w[0].1 {
                        return Err(Error::invalid(
                            "cdf breakpoints must be increasing in fraction and non-decreasing in value",
                        ));
                    }
                }
                Ok(())
            }
            RateDistribution::Lognormal { mu, sigma } => {
                if !(mu.is_finite() && *sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::invalid(format!("bad lognormal parameters ({mu}, {sigma})")));
                }
                Ok(())
            }
        }
    }

    /// Inverse CDF at `u`, clamped to the end breakpoints.
    fn quantile(points: &[(f64, f64)], u: f64) -> f64 {
        let first = points[0];
        if u <= first.0 {
            return first.1;
        }
        for w in points.windows(2) {
            let ((f0, v0), (f1, v1)) = (w[0], w[1]);
            if u <= f1 {
                let t = (u - f0) / (f1 - f0);
                return (v0.ln() + t * (v1.ln() - v0.ln())).exp();
            }
        }
        points[points.len() - 1].1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            RateDistribution::Cdf { points } => Self::quantile(points, rng.random::<f64>()),
            RateDistribution::Lognormal { mu, sigma } => LogNormal::new(*mu, *sigma).expect("validated").sample(rng),
        }
    }
}

/// Per-direction bandwidth in Mbps, compute rate in local steps per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    /// Sigma of a per-round lognormal factor on compute time; 0 disables it.
    pub compute_jitter: f64,
    pub down_mbps: RateDistribution,
    pub up_mbps: RateDistribution,
    pub compute_steps_per_s: RateDistribution,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            compute_jitter: 0.0,
            down_mbps: RateDistribution::Cdf {
                points: vec![(0.0, 1.0), (0.2, 10.0), (0.5, 40.0), (0.8, 100.0), (0.95, 300.0), (1.0, 1000.0)],
            },
            up_mbps: RateDistribution::Cdf {
                points: vec![(0.0, 0.5), (0.2, 3.0), (0.5, 10.0), (0.8, 30.0), (1.0, 100.0)],
            },
            compute_steps_per_s: RateDistribution::Lognormal { mu: 20f64.ln(), sigma: 0.5 },
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        self.down_mbps.validate()?;
        self.up_mbps.validate()?;
        self.compute_steps_per_s.validate()?;
        if !(self.compute_jitter >= 0.0 && self.compute_jitter.is_finite()) {
            return Err(Error::invalid("compute_jitter must be finite and non-negative"));
        }
        Ok(())
    }
}

pub fn sample_profiles<R: Rng + ?Sized>(n: usize, cfg: &NetworkConfig, rng: &mut R) -> Result<Vec<ClientProfile>> {
    cfg.validate()?;
    Ok((0..n)
        .map(|_| ClientProfile {
            down_bw: cfg.down_mbps.sample(rng) * MBPS,
            up_bw: cfg.up_mbps.sample(rng) * MBPS,
            compute_rate: cfg.compute_steps_per_s.sample(rng),
        })
        .collect())
}
