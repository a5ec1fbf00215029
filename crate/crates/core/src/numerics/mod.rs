//! Flat parameter vectors, top-k selection, bitmap masks and sparse-update
//! encodings with exact byte accounting.

mod mask;
mod scalar;
mod sparse;
mod topk;
mod vector;

pub use mask::MaskBitmap;
pub use scalar::Scalar;
pub use sparse::{encode_sparse, Encoding, SparseDelta, WireFormat};
pub use topk::{ratio_to_count, top_k_among, top_k_indices};
pub use vector::{apply_mask, ParamVector};
