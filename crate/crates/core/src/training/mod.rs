//! Client-side computation: small classifiers with hand-written gradients,
//! E-step momentum SGD, evaluation and the round-based learning-rate decay.

mod local;
mod model;

pub use local::{evaluate, local_train, scheduled_lr, scheduled_lr_with, Evaluation, LocalTrainConfig, LocalUpdate};
pub use model::{Activation, Model, ModelKind, ModelSpec, STAT_MOMENTUM};
