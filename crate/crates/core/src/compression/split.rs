use crate::error::{Error, Result};
use crate::numerics::{
    encode_sparse, top_k_among, top_k_indices, Encoding, MaskBitmap, ParamVector, Scalar, SparseDelta,
};

/// A client's upload and what it keeps back.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitUpdate<T> {
    /// The update on the shared mask, every masked position included.
    pub shared: SparseDelta<T>,
    /// The `k_unique` largest-magnitude positions outside the mask.
    pub unique: SparseDelta<T>,
    /// `delta - decode(shared) - decode(unique)`.
    pub residual: ParamVector<T>,
}

/// Splits `delta` into the part on `mask` (absent = empty mask) and the top
/// `k_unique` positions of the remainder.
pub fn split_masked_update<T: Scalar>(
    delta: &ParamVector<T>,
    mask: Option<&MaskBitmap>,
    k_unique: usize,
    encoding: Encoding,
) -> Result<SplitUpdate<T>> {
    let d = delta.len();
    let (shared_idx, outside): (Vec<usize>, Vec<usize>) = match mask {
        Some(m) => {
            if m.len() != d {
                return Err(Error::invalid(format!("mask length {} != update length {d}", m.len())));
            }
            (m.ones().collect(), m.zeros().collect())
        }
        None => (Vec::new(), (0..d).collect()),
    };
    let unique_idx = top_k_among(delta.as_slice(), &outside, k_unique)?;
    let shared = encode_sparse(delta, &shared_idx, encoding)?;
    let unique = encode_sparse(delta, &unique_idx, encoding)?;

    let mut residual = delta.clone();
    {
        let r = residual.as_mut_slice();
        for (j, v) in shared.iter().chain(unique.iter()) {
            r[j] -= v;
        }
    }
    Ok(SplitUpdate { shared, unique, residual })
}

/// Plain top-k sparsification, returning the kept part and the residual.
pub fn sparsify_top_k<T: Scalar>(
    delta: &ParamVector<T>,
    k: usize,
    encoding: Encoding,
) -> Result<(SparseDelta<T>, ParamVector<T>)> {
    let idx = top_k_indices(delta.as_slice(), k)?;
    let kept = encode_sparse(delta, &idx, encoding)?;
    let mut residual = delta.clone();
    let r = residual.as_mut_slice();
    for (j, v) in kept.iter() {
        r[j] -= v;
    }
    Ok((kept, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_example() {
        let delta = ParamVector::from_vec(vec![1.0, 0.0, 3.0, -2.0]);
        let mask = MaskBitmap::from_indices(4, &[0]).unwrap();
        let s = split_masked_update(&delta, Some(&mask), 1, Encoding::BitmapValues).unwrap();
        assert_eq!(s.shared.indices(), &[0]);
        assert_eq!(s.shared.values(), &[1.0]);
        assert_eq!(s.unique.indices(), &[2]);
        assert_eq!(s.unique.values(), &[3.0]);
        assert_eq!(s.residual.as_slice(), &[0.0, 0.0, 0.0, -2.0]);
    }

    #[test]
    fn lossless_when_budget_covers_everything() {
        let delta = ParamVector::from_vec(vec![0.3f32, -1.0, 2.0, 0.0, 5.0]);
        let mask = MaskBitmap::from_indices(5, &[1, 4]).unwrap();
        let s = split_masked_update(&delta, Some(&mask), 3, Encoding::BitmapValues).unwrap();
        assert!(s.residual.iter().all(|&r| r == 0.0));
        assert_eq!(s.shared.nnz() + s.unique.nnz(), 5);
    }

    #[test]
    fn zero_update_uses_lowest_indices() {
        let delta = ParamVector::<f64>::zeros(6);
        let mask = MaskBitmap::from_indices(6, &[1, 2]).unwrap();
        let s = split_masked_update(&delta, Some(&mask), 2, Encoding::BitmapValues).unwrap();
        assert_eq!(s.shared.indices(), &[1, 2]);
        assert!(s.shared.values().iter().all(|&v| v == 0.0));
        assert_eq!(s.unique.indices(), &[0, 3]);
        assert!(s.residual.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn no_mask_spends_whole_budget_on_unique() {
        let delta = ParamVector::from_vec(vec![1.0, -4.0, 2.0]);
        let s = split_masked_update(&delta, None, 2, Encoding::BitmapValues).unwrap();
        assert_eq!(s.shared.nnz(), 0);
        assert_eq!(s.unique.indices(), &[1, 2]);
    }

    #[test]
    fn sparsify_keeps_top_and_residual() {
        let delta = ParamVector::from_vec(vec![1.0, -4.0, 2.0]);
        let (kept, res) = sparsify_top_k(&delta, 1, Encoding::IndicesValues).unwrap();
        assert_eq!(kept.indices(), &[1]);
        assert_eq!(res.as_slice(), &[1.0, 0.0, 2.0]);
    }

    proptest! {
        #[test]
        fn exact_decomposition_and_disjointness(
            values in proptest::collection::vec(-1e3f64..1e3, 2..300),
            picks in proptest::collection::vec(any::<bool>(), 300),
            frac in 0.0f64..=1.0,
        ) {
            let d = values.len();
            let delta = ParamVector::from_vec(values);
            let masked: Vec<usize> = (0..d).filter(|&j| picks[j]).collect();
            let mask = MaskBitmap::from_indices(d, &masked).unwrap();
            let k = ((d - masked.len()) as f64 * frac) as usize;
            let s = split_masked_update(&delta, Some(&mask), k, Encoding::BitmapValues).unwrap();
            prop_assert_eq!(s.unique.nnz(), k);
            prop_assert_eq!(s.shared.support(), mask.clone());
            prop_assert_eq!(s.shared.support().intersection_count(&s.unique.support()), 0);
            let mut rebuilt = s.shared.decode();
            rebuilt.add_assign(&s.unique.decode()).unwrap();
            rebuilt.add_assign(&s.residual).unwrap();
            prop_assert_eq!(rebuilt, delta);
        }
    }
}
