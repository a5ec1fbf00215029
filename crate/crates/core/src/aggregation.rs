//! Server-side update rules.
//!
//! Every rule accumulates client contributions in ascending client-id order
//! so that repeated runs are bit-identical despite floating-point
//! non-associativity.

use crate::error::{Error, Result};
use crate::numerics::{
    encode_sparse, top_k_among, top_k_indices, Encoding, MaskBitmap, ParamVector, Scalar, SparseDelta,
};
use crate::sampling::GroupTag;

/// One client's masked upload with its aggregation weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedContribution<T> {
    pub client: usize,
    pub group: GroupTag,
    pub weight: f64,
    pub shared: SparseDelta<T>,
    /// Empty for strategies without a shared mask.
    pub unique: SparseDelta<T>,
}

/// Result of a mask-shifting aggregation round.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedAggregate<T> {
    pub params: ParamVector<T>,
    /// Weighted sum on the shared mask, every masked position present.
    pub shared: SparseDelta<T>,
    /// Server top-k of the weighted unique sum, outside the mask.
    pub unique: SparseDelta<T>,
    /// `shared + unique`; the update actually applied.
    pub combined: SparseDelta<T>,
    /// Weighted sum of everything uploaded, before server sparsification.
    pub uploaded_sum: ParamVector<T>,
}

fn check_dim<T: Scalar>(w: &ParamVector<T>, d: usize) -> Result<()> {
    if w.len() != d {
        return Err(Error::invalid(format!("update dimension {d} != model dimension {}", w.len())));
    }
    Ok(())
}

/// `sum_i weight_i * delta_i`, accumulated in the given order.
pub fn weighted_sum<T: Scalar>(d: usize, items: &[(f64, &ParamVector<T>)]) -> Result<ParamVector<T>> {
    let mut acc = ParamVector::zeros(d);
    for &(weight, delta) in items {
        check_dim(delta, d)?;
        let wt = T::of(weight);
        for (a, &v) in acc.as_mut_slice().iter_mut().zip(delta.iter()) {
            *a += wt * v;
        }
    }
    Ok(acc)
}

fn apply<T: Scalar>(w: &ParamVector<T>, update: &SparseDelta<T>) -> ParamVector<T> {
    let mut out = w.clone();
    let s = out.as_mut_slice();
    for (j, v) in update.iter() {
        s[j] += v;
    }
    out
}

/// `w + sum_i weight_i * delta_i` with explicit inverse-propensity weights.
pub fn weighted_aggregate<T: Scalar>(w: &ParamVector<T>, items: &[(f64, &ParamVector<T>)]) -> Result<ParamVector<T>> {
    if items.is_empty() {
        return Err(Error::invalid("no client updates to aggregate"));
    }
    let sum = weighted_sum(w.len(), items)?;
    let mut out = w.clone();
    for (a, &v) in out.as_mut_slice().iter_mut().zip(sum.iter()) {
        *a += v;
    }
    Ok(out)
}

/// FedAvg with uniform client sampling: `w + (N/K) sum_i p_i delta_i`.
pub fn fedavg_aggregate<T: Scalar>(
    w: &ParamVector<T>,
    deltas: &[(f64, ParamVector<T>)],
    n: usize,
    k: usize,
) -> Result<ParamVector<T>> {
    let scale = n as f64 / k as f64;
    let items: Vec<(f64, &ParamVector<T>)> = deltas.iter().map(|(p, d)| (scale * p, d)).collect();
    weighted_aggregate(w, &items)
}

/// Server-side top-k of the weighted sum of sparse client updates.
pub fn sparse_topk_aggregate<T: Scalar>(
    w: &ParamVector<T>,
    items: &[(f64, &SparseDelta<T>)],
    k: usize,
    encoding: Encoding,
) -> Result<(ParamVector<T>, SparseDelta<T>)> {
    if items.is_empty() {
        return Err(Error::invalid("no client updates to aggregate"));
    }
    let d = w.len();
    let mut sum = ParamVector::zeros(d);
    for &(weight, delta) in items {
        if delta.dim() != d {
            return Err(Error::invalid("client update dimension mismatch"));
        }
        delta.scatter_add(T::of(weight), &mut sum);
    }
    let idx = top_k_indices(sum.as_slice(), k)?;
    let update = encode_sparse(&sum, &idx, encoding)?;
    Ok((apply(w, &update), update))
}

/// Sparse-ternary-style round without quantization: weights `(N/K) p_i`,
/// then server top-`k` of the sum.
pub fn stc_round_aggregate<T: Scalar>(
    w: &ParamVector<T>,
    deltas: &[(f64, SparseDelta<T>)],
    n: usize,
    k_clients: usize,
    k_server: usize,
    encoding: Encoding,
) -> Result<(ParamVector<T>, SparseDelta<T>)> {
    let scale = n as f64 / k_clients as f64;
    let items: Vec<(f64, &SparseDelta<T>)> = deltas.iter().map(|(p, d)| (scale * p, d)).collect();
    sparse_topk_aggregate(w, &items, k_server, encoding)
}

/// Shared/unique aggregation. The shared part is the full weighted sum on
/// `mask`; the unique part keeps the `k_unique` largest entries of the
/// weighted unique sum outside `mask`.
pub fn gluefl_aggregate<T: Scalar>(
    w: &ParamVector<T>,
    contribs: &[WeightedContribution<T>],
    mask: Option<&MaskBitmap>,
    k_unique: usize,
    encoding: Encoding,
) -> Result<MaskedAggregate<T>> {
    if contribs.is_empty() {
        return Err(Error::invalid("no client updates to aggregate"));
    }
    let d = w.len();
    let empty = MaskBitmap::new(d);
    let mask = mask.unwrap_or(&empty);
    if mask.len() != d {
        return Err(Error::invalid("mask dimension mismatch"));
    }
    let mut order: Vec<&WeightedContribution<T>> = contribs.iter().collect();
    order.sort_by_key(|c| c.client);

    let mut shared_sum = ParamVector::zeros(d);
    let mut unique_sum = ParamVector::zeros(d);
    for c in &order {
        if c.shared.dim() != d || c.unique.dim() != d {
            return Err(Error::invalid(format!("client {} update dimension mismatch", c.client)));
        }
        if c.shared.indices().iter().any(|&j| !mask.get(j)) {
            return Err(Error::invalid(format!("client {} shared part leaves the mask", c.client)));
        }
        if c.unique.indices().iter().any(|&j| mask.get(j)) {
            return Err(Error::invalid(format!("client {} unique part overlaps the mask", c.client)));
        }
        let wt = T::of(c.weight);
        c.shared.scatter_add(wt, &mut shared_sum);
        c.unique.scatter_add(wt, &mut unique_sum);
    }

    let masked: Vec<usize> = mask.ones().collect();
    let outside: Vec<usize> = mask.zeros().collect();
    let unique_idx = top_k_among(unique_sum.as_slice(), &outside, k_unique)?;
    let shared = encode_sparse(&shared_sum, &masked, encoding)?;
    let unique = encode_sparse(&unique_sum, &unique_idx, encoding)?;

    // Disjoint supports: the combined update copies values, no addition.
    let mut combined_dense = shared_sum.clone();
    for (j, v) in unique.iter() {
        combined_dense[j] = v;
    }
    let mut support = masked;
    support.extend_from_slice(&unique_idx);
    let combined = encode_sparse(&combined_dense, &support, encoding)?;

    let mut uploaded_sum = shared_sum;
    uploaded_sum.add_assign(&unique_sum)?;
    Ok(MaskedAggregate { params: apply(w, &combined), shared, unique, combined, uploaded_sum })
}

/// Non-trainable running statistics: plain mean of the reported changes,
/// independent of client weights.
pub fn bn_stat_aggregate<T: Scalar>(v: &ParamVector<T>, stat_deltas: &[ParamVector<T>]) -> Result<ParamVector<T>> {
    if stat_deltas.is_empty() {
        return Err(Error::invalid("no statistic updates to aggregate"));
    }
    let mut sum = ParamVector::zeros(v.len());
    for delta in stat_deltas {
        sum.add_assign(delta)?;
    }
    let k = T::of(stat_deltas.len() as f64);
    let mut out = v.clone();
    for (a, &s) in out.as_mut_slice().iter_mut().zip(sum.iter()) {
        *a += s / k;
    }
    Ok(out)
}
