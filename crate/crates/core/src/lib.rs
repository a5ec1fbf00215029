//! Deterministic simulator for bandwidth-efficient federated learning.
//!
//! The crate combines sticky client sampling, shared-mask shifting with
//! error compensation, unbiased inverse-propensity aggregation and
//! over-commitment, and accounts every downstream/upstream byte a client
//! would move. Numeric kernels are generic over the scalar type; the
//! experiment engine runs in `f64`.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod compression;
pub mod data;
pub mod error;
pub mod harness;
pub mod netsim;
pub mod numerics;
pub mod rng;
pub mod sampling;
pub mod training;

pub use error::{Error, Result};
pub use numerics::{Encoding, MaskBitmap, ParamVector, Scalar, SparseDelta};

/// Double-precision parameter vector used by the experiment engine.
pub type ParamVec = ParamVector<f64>;
/// Single-precision parameter vector.
pub type ParamVec32 = ParamVector<f32>;
/// Double-precision sparse update.
pub type Delta = SparseDelta<f64>;
/// Single-precision sparse update.
pub type Delta32 = SparseDelta<f32>;
/// Double-precision model.
pub type Model = training::Model<f64>;
