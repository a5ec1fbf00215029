use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Model;
use crate::data::Example;
use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalTrainConfig {
    /// Local SGD steps per round (`E`).
    pub local_steps: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
}

impl Default for LocalTrainConfig {
    fn default() -> Self {
        Self { local_steps: 10, batch_size: 16, lr: 0.01, momentum: 0.9 }
    }
}

impl LocalTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.local_steps < 1 || self.batch_size < 1 {
            return Err(Error::invalid("local_steps and batch_size must be at least 1"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid(format!("learning rate {} must be finite and non-negative", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalUpdate<T> {
    /// `w_final - w_start`.
    pub delta: ParamVector<T>,
    /// Change in running statistics; empty when the model has none.
    pub stats_delta: ParamVector<T>,
}

/// Runs `E` momentum-SGD steps from `params` on minibatches drawn with
/// replacement from `shard`. The momentum buffer starts at zero and is
/// discarded afterwards.
pub fn local_train<T: Scalar, R: Rng + ?Sized>(
    model: &Model<T>,
    params: &ParamVector<T>,
    stats: &ParamVector<T>,
    shard: &[Example],
    cfg: &LocalTrainConfig,
    rng: &mut R,
) -> Result<LocalUpdate<T>> {
    if shard.is_empty() {
        return Err(Error::invalid("cannot train on an empty shard"));
    }
    cfg.validate()?;
    let lr = T::of(cfg.lr);
    let mu = T::of(cfg.momentum);
    let batch_size = cfg.batch_size.min(shard.len());

    let mut w = params.clone();
    let mut st = stats.clone();
    let mut velocity = ParamVector::<T>::zeros(params.len());
    for _ in 0..cfg.local_steps {
        let batch: Vec<&Example> = (0..batch_size).map(|_| &shard[rng.random_range(0..shard.len())]).collect();
        let (_, grad) = model.loss_and_grad(&w, &st, &batch)?;
        for ((v, &g), x) in velocity.as_mut_slice().iter_mut().zip(grad.iter()).zip(w.as_mut_slice()) {
            *v = mu * *v + g;
            *x -= lr * *v;
        }
        model.update_stats(&mut st, &batch);
    }
    Ok(LocalUpdate { delta: w.sub(params)?, stats_delta: st.sub(stats)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

/// Mean cross-entropy and top-1 accuracy; ties go to the lowest class index.
pub fn evaluate<T: Scalar>(
    model: &Model<T>,
    params: &ParamVector<T>,
    stats: &ParamVector<T>,
    test: &[Example],
) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty test set"));
    }
    let mut correct = 0usize;
    let mut loss = 0.0;
    for ex in test {
        let z = model.logits(params, stats, &ex.features)?;
        let pred = z.iter().enumerate().fold(0, |best, (i, &v)| if v > z[best] { i } else { best });
        correct += (pred == ex.label) as usize;
        let max = z.iter().copied().fold(T::neg_infinity(), T::max);
        let lse = max + z.iter().map(|&v| (v - max).exp()).sum::<T>().ln();
        loss += (lse - z[ex.label]).as_f64();
    }
    let n = test.len() as f64;
    Ok(Evaluation { loss: loss / n, accuracy: correct as f64 / n })
}

/// `base * 0.98^floor((round - 1) / 10)`.
pub fn scheduled_lr(base: f64, round: usize) -> f64 {
    scheduled_lr_with(base, round, 0.98, 10)
}

pub fn scheduled_lr_with(base: f64, round: usize, decay: f64, every: usize) -> f64 {
    let steps = round.saturating_sub(1) / every.max(1);
    base * decay.powi(steps as i32)
}
