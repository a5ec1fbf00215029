use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compression::{CompensationMode, RegenMode};
use crate::data::{PartitionSpec, SyntheticSpec, WeightMode};
use crate::error::{Error, Result};
use crate::netsim::NetworkConfig;
use crate::numerics::Encoding;
use crate::training::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Dense updates.
    Fedavg,
    /// Client and server top-q sparsification.
    Stc,
    /// Sticky sampling with shared-mask shifting.
    Gluefl,
    /// As `gluefl` but every used client weighs `1/K`.
    GlueflEqualWeights,
    GlueflNoEc,
    GlueflEcUnscaled,
    GlueflNoRegen,
}

/// How a strategy moves updates over the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    Dense,
    TopK,
    Masked,
}

impl Strategy {
    pub fn update_kind(self) -> UpdateKind {
        match self {
            Strategy::Fedavg => UpdateKind::Dense,
            Strategy::Stc => UpdateKind::TopK,
            _ => UpdateKind::Masked,
        }
    }

    pub fn default_sampling(self) -> SamplingMode {
        match self {
            Strategy::Fedavg | Strategy::Stc => SamplingMode::Uniform,
            _ => SamplingMode::Sticky,
        }
    }

    pub fn equal_weights(self) -> bool {
        self == Strategy::GlueflEqualWeights
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    Uniform,
    Sticky,
}

/// What to do when too few participants finish to fill a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropoutPolicy {
    #[default]
    Error,
    /// Leave the model unchanged for that round.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetConfig {
    Synthetic {
        classes: usize,
        dim: usize,
        total: usize,
        separation: f64,
    },
    /// Header row; last column is the integer label.
    Csv {
        path: PathBuf,
        #[serde(default = "default_test_fraction")]
        test_fraction: f64,
    },
}

fn default_test_fraction() -> f64 {
    0.2
}

impl Default for DatasetConfig {
    fn default() -> Self {
        let s = SyntheticSpec::default();
        DatasetConfig::Synthetic { classes: s.classes, dim: s.dim, total: s.total, separation: s.separation }
    }
}

/// One experiment. Every field has a default, so a config file only lists
/// what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub strategy: Strategy,
    pub seed: u64,
    pub rounds: usize,

    /// Clients before small shards are dropped.
    pub n: usize,
    pub k: usize,
    /// Sticky group size; defaults to `4k`.
    pub s: Option<usize>,
    /// Sticky clients used per round; defaults to `4k/5`.
    pub c: Option<usize>,
    /// Defaults to uniform for fedavg/stc and sticky otherwise.
    pub sampling: Option<SamplingMode>,

    pub q: f64,
    pub q_shr: f64,
    /// Rounds between shared-mask regenerations; 0 disables it.
    pub regen_interval: usize,
    pub regen_mode: RegenMode,
    /// Keep top-k residuals on clients under stc.
    pub stc_residuals: bool,

    pub oc: f64,
    /// Share of extra draws taken from the sticky group; defaults to `c/k`.
    pub f_sticky: Option<f64>,
    pub p_offline: f64,
    pub on_dropout: DropoutPolicy,

    pub local_steps: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
    pub lr_decay: f64,
    pub lr_decay_every: usize,

    pub p_mode: WeightMode,
    pub encoding: Encoding,
    /// Charge a mask bitmap to every download under shared-mask strategies.
    pub charge_mask: bool,
    /// Accuracy threshold for the summary; absent means full-run totals.
    pub target_accuracy: Option<f64>,

    pub dataset: DatasetConfig,
    pub partition: PartitionSpec,
    pub model: ModelKind,
    pub network: NetworkConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Gluefl,
            seed: 1,
            rounds: 100,
            n: 200,
            k: 10,
            s: None,
            c: None,
            sampling: None,
            q: 0.2,
            q_shr: 0.16,
            regen_interval: 10,
            regen_mode: RegenMode::EmptyMask,
            stc_residuals: false,
            oc: 1.3,
            f_sticky: None,
            p_offline: 0.0,
            on_dropout: DropoutPolicy::Error,
            local_steps: 10,
            batch_size: 16,
            lr: 0.05,
            momentum: 0.9,
            lr_decay: 0.98,
            lr_decay_every: 10,
            p_mode: WeightMode::Proportional,
            encoding: Encoding::BitmapValues,
            charge_mask: true,
            target_accuracy: None,
            dataset: DatasetConfig::default(),
            partition: PartitionSpec::default(),
            model: ModelKind::Logistic,
            network: NetworkConfig::default(),
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        // csv paths are relative to the config file
        if let DatasetConfig::Csv { path: data, .. } = &mut cfg.dataset {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn sampling_mode(&self) -> SamplingMode {
        self.sampling.unwrap_or(self.strategy.default_sampling())
    }

    pub fn sticky_size(&self) -> usize {
        self.s.unwrap_or(4 * self.k)
    }

    pub fn sticky_used(&self) -> usize {
        self.c.unwrap_or(4 * self.k / 5)
    }

    pub fn regen_interval(&self) -> Option<usize> {
        match (self.strategy, self.regen_interval) {
            (Strategy::GlueflNoRegen, _) | (_, 0) => None,
            (_, i) => Some(i),
        }
    }

    pub fn compensation(&self) -> CompensationMode {
        match self.strategy {
            Strategy::Fedavg => CompensationMode::None,
            Strategy::Stc if self.stc_residuals => CompensationMode::Unscaled,
            Strategy::Stc => CompensationMode::None,
            Strategy::GlueflNoEc => CompensationMode::None,
            Strategy::GlueflEcUnscaled => CompensationMode::Unscaled,
            _ => CompensationMode::Rescaled,
        }
    }

    /// Checks that do not need the data. Sticky-group bounds are checked
    /// again against the client count that survives partitioning.
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(cfg_err("rounds must be at least 1"));
        }
        if self.k < 1 || self.k > self.n {
            return Err(cfg_err(format!("need 1 <= k <= n, got k={} n={}", self.k, self.n)));
        }
        let sticky = self.sampling_mode() == SamplingMode::Sticky;
        if self.strategy.update_kind() == UpdateKind::Masked && !sticky {
            return Err(cfg_err("shared-mask strategies need sticky sampling"));
        }
        if sticky {
            self.check_sticky(self.n)?;
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(cfg_err(format!("q {} outside (0, 1]", self.q)));
        }
        if self.strategy.update_kind() == UpdateKind::Masked && !(0.0 <= self.q_shr && self.q_shr < self.q) {
            return Err(cfg_err(format!("need 0 <= q_shr < q, got q_shr={} q={}", self.q_shr, self.q)));
        }
        if !(self.oc >= 1.0 && self.oc.is_finite()) {
            return Err(cfg_err(format!("oc {} must be at least 1", self.oc)));
        }
        if let Some(f) = self.f_sticky {
            if !(0.0..=1.0).contains(&f) {
                return Err(cfg_err(format!("f_sticky {f} outside [0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.p_offline) {
            return Err(cfg_err(format!("p_offline {} outside [0, 1)", self.p_offline)));
        }
        if self.local_steps < 1 || self.batch_size < 1 {
            return Err(cfg_err("local_steps and batch_size must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(cfg_err(format!("lr {} must be positive", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(cfg_err(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) || self.lr_decay_every < 1 {
            return Err(cfg_err("lr_decay must lie in (0, 1] and lr_decay_every be at least 1"));
        }
        if let Some(t) = self.target_accuracy {
            if !(0.0..=1.0).contains(&t) {
                return Err(cfg_err(format!("target_accuracy {t} outside [0, 1]")));
            }
        }
        if !(self.partition.alpha > 0.0) {
            return Err(cfg_err("partition.alpha must be positive"));
        }
        match &self.dataset {
            DatasetConfig::Synthetic { classes, dim, total, separation } => {
                if *classes < 2 || *dim < 1 || *total < 5 || !(*separation >= 0.0) {
                    return Err(cfg_err("synthetic dataset needs classes >= 2, dim >= 1, total >= 5, separation >= 0"));
                }
            }
            DatasetConfig::Csv { test_fraction, .. } => {
                if !(*test_fraction > 0.0 && *test_fraction < 1.0) {
                    return Err(cfg_err("test_fraction must lie in (0, 1)"));
                }
            }
        }
        self.network.validate().map_err(|e| cfg_err(e.to_string()))
    }

    /// Sticky-group bounds for `n` clients, including room for the extra
    /// over-committed draws.
    pub fn check_sticky(&self, n: usize) -> Result<()> {
        let (k, s, c) = (self.k, self.sticky_size(), self.sticky_used());
        if !(0 < c && c < k && k <= s && s < n && c * n > k * s) {
            return Err(cfg_err(format!(
                "sticky sampling needs 0 < c < k <= s < n and c*n > k*s, got n={n} k={k} s={s} c={c}"
            )));
        }
        Ok(())
    }
}
