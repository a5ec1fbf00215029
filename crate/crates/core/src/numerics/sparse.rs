use serde::{Deserialize, Serialize};

use super::{MaskBitmap, ParamVector, Scalar};
use crate::error::{Error, Result};

/// On-wire layout of a sparse update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    /// `ceil(d/8)` bitmap followed by the values in ascending index order.
    #[default]
    BitmapValues,
    /// One index and one value per supported position.
    IndicesValues,
    /// Every position, supported or not.
    Dense,
}

/// Byte widths used for accounting. Internal arithmetic is unaffected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireFormat {
    pub value_bytes: usize,
    pub index_bytes: usize,
}

impl Default for WireFormat {
    fn default() -> Self {
        Self { value_bytes: 4, index_bytes: 4 }
    }
}

impl Encoding {
    pub fn byte_size(self, d: usize, nnz: usize, wire: WireFormat) -> usize {
        match self {
            Encoding::BitmapValues => d.div_ceil(8) + wire.value_bytes * nnz,
            Encoding::IndicesValues => (wire.index_bytes + wire.value_bytes) * nnz,
            Encoding::Dense => wire.value_bytes * d,
        }
    }
}

/// A masked update: ascending support positions and their values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseDelta<T> {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<T>,
    encoding: Encoding,
}

impl<T: Scalar> SparseDelta<T> {
    pub fn empty(dim: usize, encoding: Encoding) -> Self {
        Self { dim, indices: Vec::new(), values: Vec::new(), encoding }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn support(&self) -> MaskBitmap {
        let mut m = MaskBitmap::new(self.dim);
        for &j in &self.indices {
            m.set(j);
        }
        m
    }

    pub fn byte_size(&self) -> usize {
        self.byte_size_with(WireFormat::default())
    }

    pub fn byte_size_with(&self, wire: WireFormat) -> usize {
        self.encoding.byte_size(self.dim, self.nnz(), wire)
    }

    /// Values alone, for a support both sides already know.
    pub fn payload_bytes(&self, wire: WireFormat) -> usize {
        wire.value_bytes * self.nnz()
    }

    pub fn decode(&self) -> ParamVector<T> {
        let mut out = ParamVector::zeros(self.dim);
        self.scatter_add(T::one(), &mut out);
        out
    }

    /// `out[j] += weight * value` over the support.
    pub fn scatter_add(&self, weight: T, out: &mut ParamVector<T>) {
        let s = out.as_mut_slice();
        for (j, v) in self.iter() {
            s[j] += weight * v;
        }
    }
}

/// Restrict `v` to `support` (deduplicated, sorted) and record the encoding.
pub fn encode_sparse<T: Scalar>(v: &ParamVector<T>, support: &[usize], encoding: Encoding) -> Result<SparseDelta<T>> {
    let d = v.len();
    if let Some(&bad) = support.iter().find(|&&j| j >= d) {
        return Err(Error::invalid(format!("support index {bad} out of range for dimension {d}")));
    }
    let mut indices = support.to_vec();
    indices.sort_unstable();
    indices.dedup();
    let values = indices.iter().map(|&j| v[j]).collect();
    Ok(SparseDelta { dim: d, indices, values, encoding })
}
