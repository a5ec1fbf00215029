use std::cmp::Ordering;

use super::Scalar;
use crate::error::{Error, Result};

/// Resolves a fractional ratio to an integer count: `round_half_up(q*d)`,
/// clamped to at least one whenever `q > 0`.
pub fn ratio_to_count(q: f64, d: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("ratio {q} outside [0, 1]")));
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if q == 0.0 {
        return Ok(0);
    }
    let k = (q * d as f64 + 0.5).floor() as usize;
    Ok(k.clamp(1, d))
}

/// Larger magnitude first, then lower index.
#[inline]
fn rank_order<T: Scalar>(v: &[T], a: usize, b: usize) -> Ordering {
    v[b].abs().partial_cmp(&v[a].abs()).unwrap_or(Ordering::Equal).then(a.cmp(&b))
}

/// The `k` positions of largest `|v[j]|`, ties broken by lower index,
/// returned in ascending index order.
pub fn top_k_indices<T: Scalar>(v: &[T], k: usize) -> Result<Vec<usize>> {
    if k > v.len() {
        return Err(Error::invalid(format!("k = {k} exceeds dimension {}", v.len())));
    }
    let candidates: Vec<usize> = (0..v.len()).collect();
    Ok(select(v, candidates, k))
}

/// Top-k restricted to `candidates` (any order, no duplicates).
pub fn top_k_among<T: Scalar>(v: &[T], candidates: &[usize], k: usize) -> Result<Vec<usize>> {
    if k > candidates.len() {
        return Err(Error::invalid(format!("k = {k} exceeds candidate count {}", candidates.len())));
    }
    if let Some(&bad) = candidates.iter().find(|&&j| j >= v.len()) {
        return Err(Error::invalid(format!("candidate {bad} out of range")));
    }
    Ok(select(v, candidates.to_vec(), k))
}

fn select<T: Scalar>(v: &[T], mut idx: Vec<usize>, k: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, |&a, &b| rank_order(v, a, b));
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}
