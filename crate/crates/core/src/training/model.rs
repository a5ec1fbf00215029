use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::data::Example;
use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Scalar};

/// Update rate of the running input statistics.
pub const STAT_MOMENTUM: f64 = 0.1;
const STAT_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelKind {
    /// Softmax regression.
    #[default]
    Logistic,
    Mlp {
        hidden: Vec<usize>,
        #[serde(default)]
        activation: Activation,
    },
    /// MLP whose input is normalized by running per-feature mean/variance,
    /// the non-trainable statistics exchanged alongside the parameters.
    MlpRunningStats {
        hidden: Vec<usize>,
        #[serde(default)]
        activation: Activation,
    },
}

/// Architecture plus the flattening contract.
///
/// Parameters are laid out layer by layer from input to output; each layer
/// stores its `out x in` weight matrix row-major followed by its `out`
/// biases. Statistics are the `input_dim` running means followed by the
/// `input_dim` running variances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub input_dim: usize,
    pub classes: usize,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, input_dim: usize, classes: usize) -> Result<Self> {
        if input_dim == 0 || classes < 2 {
            return Err(Error::invalid("need input_dim >= 1 and classes >= 2"));
        }
        if let ModelKind::Mlp { hidden, .. } | ModelKind::MlpRunningStats { hidden, .. } = &kind {
            if hidden.contains(&0) {
                return Err(Error::invalid("hidden layer sizes must be positive"));
            }
        }
        Ok(Self { kind, input_dim, classes })
    }

    /// `(fan_in, fan_out)` per layer.
    pub fn layers(&self) -> Vec<(usize, usize)> {
        let hidden: &[usize] = match &self.kind {
            ModelKind::Logistic => &[],
            ModelKind::Mlp { hidden, .. } | ModelKind::MlpRunningStats { hidden, .. } => hidden,
        };
        let mut dims = vec![self.input_dim];
        dims.extend_from_slice(hidden);
        dims.push(self.classes);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Trainable parameter count `d`.
    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|&(i, o)| o * i + o).sum()
    }

    /// Non-trainable statistic count `s`.
    pub fn stat_count(&self) -> usize {
        match self.kind {
            ModelKind::MlpRunningStats { .. } => 2 * self.input_dim,
            _ => 0,
        }
    }

    fn activation(&self) -> Activation {
        match &self.kind {
            ModelKind::Logistic => Activation::Relu,
            ModelKind::Mlp { activation, .. } | ModelKind::MlpRunningStats { activation, .. } => *activation,
        }
    }
}

/// A model spec bound to a scalar type, with forward and backward passes.
#[derive(Debug, Clone)]
pub struct Model<T> {
    spec: ModelSpec,
    layers: Vec<(usize, usize)>,
    activation: Activation,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Scalar> Model<T> {
    pub fn new(spec: ModelSpec) -> Self {
        let layers = spec.layers();
        let activation = spec.activation();
        Self { spec, layers, activation, _scalar: std::marker::PhantomData }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn param_count(&self) -> usize {
        self.spec.param_count()
    }

    pub fn stat_count(&self) -> usize {
        self.spec.stat_count()
    }

    pub fn has_stats(&self) -> bool {
        self.stat_count() > 0
    }

    /// Zero weights for softmax regression; uniform Glorot weights and zero
    /// biases for MLPs.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamVector<T> {
        let mut out = Vec::with_capacity(self.param_count());
        let logistic = matches!(self.spec.kind, ModelKind::Logistic);
        for &(fan_in, fan_out) in &self.layers {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
            for _ in 0..fan_in * fan_out {
                out.push(if logistic { T::zero() } else { T::of(dist.sample(rng)) });
            }
            out.extend(std::iter::repeat_n(T::zero(), fan_out));
        }
        ParamVector::from_vec(out)
    }

    /// Means 0 and variances 1.
    pub fn init_stats(&self) -> ParamVector<T> {
        let n = self.spec.input_dim;
        if !self.has_stats() {
            return ParamVector::zeros(0);
        }
        let mut v = vec![T::zero(); n];
        v.extend(std::iter::repeat_n(T::one(), n));
        ParamVector::from_vec(v)
    }

    fn check(&self, params: &ParamVector<T>, stats: &ParamVector<T>) -> Result<()> {
        if params.len() != self.param_count() || stats.len() != self.stat_count() {
            return Err(Error::invalid(format!(
                "expected {} params / {} stats, got {} / {}",
                self.param_count(),
                self.stat_count(),
                params.len(),
                stats.len()
            )));
        }
        Ok(())
    }

    fn input(&self, stats: &ParamVector<T>, x: &[f64]) -> Vec<T> {
        if !self.has_stats() {
            return x.iter().map(|&v| T::of(v)).collect();
        }
        let n = self.spec.input_dim;
        let (mean, var) = stats.as_slice().split_at(n);
        let eps = T::of(STAT_EPS);
        x.iter().enumerate().map(|(i, &v)| (T::of(v) - mean[i]) / (var[i] + eps).sqrt()).collect()
    }

    fn act(&self, z: T) -> T {
        match self.activation {
            Activation::Relu => z.max(T::zero()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output `a`
    /// (relu: `a > 0` iff the pre-activation was positive).
    fn act_grad(&self, a: T) -> T {
        match self.activation {
            Activation::Relu => {
                if a > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - a * a,
        }
    }

    /// Activations of every layer; the last entry holds the logits.
    fn forward_all(&self, params: &[T], input: Vec<T>) -> Vec<Vec<T>> {
        let mut acts = vec![input];
        let mut off = 0;
        let last = self.layers.len() - 1;
        for (l, &(fan_in, fan_out)) in self.layers.iter().enumerate() {
            let w = &params[off..off + fan_in * fan_out];
            let b = &params[off + fan_in * fan_out..off + fan_in * fan_out + fan_out];
            off += fan_in * fan_out + fan_out;
            let prev = &acts[l];
            let mut z: Vec<T> = (0..fan_out)
                .map(|o| {
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    row.iter().zip(prev).fold(b[o], |acc, (&wi, &xi)| acc + wi * xi)
                })
                .collect();
            if l != last {
                for v in &mut z {
                    *v = self.act(*v);
                }
            }
            acts.push(z);
        }
        acts
    }

    pub fn logits(&self, params: &ParamVector<T>, stats: &ParamVector<T>, x: &[f64]) -> Result<Vec<T>> {
        self.check(params, stats)?;
        Ok(self.forward_all(params.as_slice(), self.input(stats, x)).pop().expect("output layer"))
    }

    /// Mean softmax cross-entropy over `batch`.
    pub fn loss(&self, params: &ParamVector<T>, stats: &ParamVector<T>, batch: &[&Example]) -> Result<T> {
        self.check(params, stats)?;
        let mut total = T::zero();
        for ex in batch {
            let logits =
                self.forward_all(params.as_slice(), self.input(stats, &ex.features)).pop().expect("output layer");
            total += cross_entropy(&logits, ex.label);
        }
        Ok(total / T::of(batch.len().max(1) as f64))
    }

    /// Mean cross-entropy and its gradient with respect to the parameters.
    pub fn loss_and_grad(
        &self,
        params: &ParamVector<T>,
        stats: &ParamVector<T>,
        batch: &[&Example],
    ) -> Result<(T, ParamVector<T>)> {
        self.check(params, stats)?;
        if batch.is_empty() {
            return Err(Error::invalid("empty batch"));
        }
        let p = params.as_slice();
        let mut grad = vec![T::zero(); p.len()];
        let mut total = T::zero();
        let scale = T::one() / T::of(batch.len() as f64);
        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |off, &(i, o)| {
                let here = *off;
                *off += i * o + o;
                Some(here)
            })
            .collect();

        for ex in batch {
            let acts = self.forward_all(p, self.input(stats, &ex.features));
            let logits = acts.last().expect("output layer");
            total += cross_entropy(logits, ex.label);
            // d loss / d logits = softmax - onehot
            let mut delta = softmax(logits);
            delta[ex.label] -= T::one();

            for l in (0..self.layers.len()).rev() {
                let (fan_in, fan_out) = self.layers[l];
                let off = offsets[l];
                let prev = &acts[l];
                for o in 0..fan_out {
                    let g = delta[o] * scale;
                    let row = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
                    for (gi, &xi) in row.iter_mut().zip(prev) {
                        *gi += g * xi;
                    }
                    grad[off + fan_in * fan_out + o] += g;
                }
                if l == 0 {
                    break;
                }
                let w = &p[off..off + fan_in * fan_out];
                let mut back = vec![T::zero(); fan_in];
                for o in 0..fan_out {
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    for (bi, &wi) in back.iter_mut().zip(row) {
                        *bi += wi * delta[o];
                    }
                }
                delta = back.iter().zip(prev).map(|(&b, &a)| b * self.act_grad(a)).collect();
            }
        }
        Ok((total * scale, ParamVector::from_vec(grad)))
    }

    /// Exponential moving update of the running input statistics from one batch.
    pub fn update_stats(&self, stats: &mut ParamVector<T>, batch: &[&Example]) {
        if !self.has_stats() || batch.is_empty() {
            return;
        }
        let n = self.spec.input_dim;
        let m = T::of(STAT_MOMENTUM);
        let count = T::of(batch.len() as f64);
        let s = stats.as_mut_slice();
        for i in 0..n {
            let mean = batch.iter().map(|e| T::of(e.features[i])).sum::<T>() / count;
            let var = batch.iter().map(|e| (T::of(e.features[i]) - mean).powi(2)).sum::<T>() / count;
            s[i] = (T::one() - m) * s[i] + m * mean;
            s[n + i] = (T::one() - m) * s[n + i] + m * var;
        }
    }
}

fn softmax<T: Scalar>(z: &[T]) -> Vec<T> {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn cross_entropy<T: Scalar>(z: &[T], label: usize) -> T {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = max + z.iter().map(|&v| (v - max).exp()).sum::<T>().ln();
    lse - z[label]
}
