//! Shared-mask shifting: the client-side split of an update into its shared
//! and unique parts, the server-side mask advance with periodic
//! regeneration, and the per-client error-compensation store.

mod compensation;
mod shared_mask;
mod split;

pub use compensation::{compensate_delta, CompensationMode, CompensationRecord, CompensationStore};
pub use shared_mask::{advance_shared_mask, RegenMode, SharedMaskState};
pub use split::{sparsify_top_k, split_masked_update, SplitUpdate};
