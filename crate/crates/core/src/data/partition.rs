use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::{ClientShard, Dataset, Example};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    /// Dirichlet concentration; small values mean strong label skew.
    pub alpha: f64,
    /// Shards smaller than this are dissolved into the others.
    pub min_size: usize,
}

impl Default for PartitionSpec {
    fn default() -> Self {
        Self { alpha: 0.5, min_size: 22 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// `p_i = n_i / sum_j n_j`
    #[default]
    Proportional,
    Uniform,
}

fn dirichlet<R: Rng + ?Sized>(alpha: f64, n: usize, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
    let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    if sum > 0.0 {
        draws.into_iter().map(|g| g / sum).collect()
    } else {
        // every draw underflowed; fall back to an even split
        vec![1.0 / n as f64; n]
    }
}

/// Largest-remainder rounding of `props * total` to integers summing to `total`.
fn apportion(props: &[f64], total: usize) -> Vec<usize> {
    let raw: Vec<f64> = props.iter().map(|p| p * total as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut short = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..props.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if short == 0 {
            break;
        }
        counts[i] += 1;
        short -= 1;
    }
    counts
}

/// Splits each class across `n` clients with proportions drawn from a
/// symmetric Dirichlet(`alpha`). Shards below `min_size` are dropped and
/// their examples dealt round-robin to the surviving shards, which are then
/// renumbered from zero.
pub fn partition_dirichlet<R: Rng + ?Sized>(
    data: &Dataset,
    n: usize,
    spec: &PartitionSpec,
    rng: &mut R,
) -> Result<Vec<ClientShard>> {
    if n == 0 {
        return Err(Error::invalid("need at least one client"));
    }
    if !(spec.alpha > 0.0 && spec.alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha {} must be positive", spec.alpha)));
    }
    if n * spec.min_size.max(1) > data.len() {
        return Err(Error::invalid(format!(
            "{n} clients x {} minimum examples exceeds the {} available",
            spec.min_size.max(1),
            data.len()
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.classes.max(1)];
    for (i, ex) in data.examples.iter().enumerate() {
        if ex.label >= by_class.len() {
            by_class.resize(ex.label + 1, Vec::new());
        }
        by_class[ex.label].push(i);
    }
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); n];
    for members in &mut by_class {
        members.shuffle(rng);
        let props = dirichlet(spec.alpha, n, rng);
        let mut start = 0;
        for (client, count) in apportion(&props, members.len()).into_iter().enumerate() {
            assigned[client].extend_from_slice(&members[start..start + count]);
            start += count;
        }
    }

    let min = spec.min_size.max(1);
    let (kept, dropped): (Vec<Vec<usize>>, Vec<Vec<usize>>) = assigned.into_iter().partition(|s| s.len() >= min);
    let mut kept = if kept.is_empty() {
        return Err(Error::invalid("every shard fell below the minimum size"));
    } else {
        kept
    };
    let orphans: Vec<usize> = dropped.into_iter().flatten().collect();
    let survivors = kept.len();
    for (i, ex) in orphans.into_iter().enumerate() {
        kept[i % survivors].push(ex);
    }
    Ok(kept
        .into_iter()
        .enumerate()
        .map(|(client, mut idx)| {
            idx.sort_unstable();
            ClientShard { client, examples: idx.into_iter().map(|i| data.examples[i].clone()).collect() }
        })
        .collect())
}

/// Client weights summing to one; the last entry absorbs rounding.
pub fn client_weights(shards: &[ClientShard], mode: WeightMode) -> Vec<f64> {
    let n = shards.len();
    if n == 0 {
        return Vec::new();
    }
    let mut p: Vec<f64> = match mode {
        WeightMode::Uniform => vec![1.0 / n as f64; n],
        WeightMode::Proportional => {
            let total: usize = shards.iter().map(ClientShard::len).sum();
            shards.iter().map(|s| s.len() as f64 / total as f64).collect()
        }
    };
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    p
}

pub fn label_histogram(examples: &[Example], classes: usize) -> Vec<f64> {
    let mut h = vec![0.0; classes];
    for e in examples {
        h[e.label] += 1.0;
    }
    let n = examples.len().max(1) as f64;
    h.iter_mut().for_each(|x| *x /= n);
    h
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
