use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, Example};
use crate::error::{Error, Result};

/// Gaussian mixture with unit-variance isotropic noise around one mean per
/// class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub dim: usize,
    /// Train plus test examples.
    pub total: usize,
    /// Pairwise distance between class means, in noise standard deviations.
    pub separation: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { classes: 10, dim: 200, total: 20_000, separation: 3.0 }
    }
}

fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// Class means. With `dim >= classes` they are orthogonal and sit exactly
/// `separation` apart; otherwise random directions with that expected gap.
fn class_means<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Vec<Vec<f64>> {
    let scale = spec.separation / 2f64.sqrt();
    if spec.dim >= spec.classes {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(spec.classes);
        while basis.len() < spec.classes {
            let mut v = gaussian_vec(rng, spec.dim);
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                basis.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
        basis.into_iter().map(|b| b.into_iter().map(|x| x * scale).collect()).collect()
    } else {
        let s = spec.separation / (2.0 * spec.dim as f64).sqrt();
        (0..spec.classes).map(|_| gaussian_vec(rng, spec.dim).into_iter().map(|x| x * s).collect()).collect()
    }
}

/// Returns `(train, test)` with a fixed 80/20 split of `total` examples and
/// balanced labels.
pub fn generate_synthetic<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<(Dataset, Dataset)> {
    if spec.classes < 2 || spec.dim < 1 || spec.total < 5 {
        return Err(Error::invalid("synthetic data needs classes >= 2, dim >= 1 and total >= 5"));
    }
    if !(spec.separation >= 0.0 && spec.separation.is_finite()) {
        return Err(Error::invalid("separation must be finite and non-negative"));
    }
    let means = class_means(spec, rng);
    let mut examples: Vec<Example> = (0..spec.total)
        .map(|i| {
            let label = i % spec.classes;
            let features = means[label]
                .iter()
                .map(|&m| {
                    m + {
                        let z: f64 = StandardNormal.sample(rng);
                        z
                    }
                })
                .collect::<Vec<f64>>();
            Example { features, label }
        })
        .collect();
    examples.shuffle(rng);
    let test_len = spec.total / 5;
    let test = examples.split_off(spec.total - test_len);
    let mk = |examples| Dataset { dim: spec.dim, classes: spec.classes, examples };
    Ok((mk(examples), mk(test)))
}
