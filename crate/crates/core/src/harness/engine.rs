use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;

use super::config::{DatasetConfig, DropoutPolicy, ExperimentConfig, SamplingMode, UpdateKind};
use super::metrics::RoundMetrics;
use crate::aggregation::{
    bn_stat_aggregate, gluefl_aggregate, sparse_topk_aggregate, weighted_aggregate, WeightedContribution,
};
use crate::compression::{
    advance_shared_mask, sparsify_top_k, split_masked_update, CompensationMode, CompensationStore, RegenMode,
    SharedMaskState, SplitUpdate,
};
use crate::data::{
    client_weights, generate_synthetic, load_csv, partition_dirichlet, split_train_test, ClientShard, Dataset,
    SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::netsim::{
    downstream_payload, plan_overcommit, sample_profiles, simulate_round_timing, ClientProfile, OvercommitPlan,
    Participant, ServerVersionVector,
};
use crate::numerics::{encode_sparse, ratio_to_count, Encoding, MaskBitmap};
use crate::rng::{stream, substream, SimRng, Stream};
use crate::sampling::{aggregation_weight, sample_groups, update_sticky_group, GroupTag, SamplingParams, StickyState};
use crate::training::{evaluate, local_train, scheduled_lr_with, LocalTrainConfig, ModelSpec};
use crate::{Delta, Model, ParamVec};

/// What one used client computed and sent.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientTrace {
    pub client: usize,
    pub group: GroupTag,
    pub weight: f64,
    /// Local update after error compensation, before sparsification.
    pub compensated: ParamVec,
    /// `shared` is empty for strategies without a shared mask.
    pub split: SplitUpdate<f64>,
}

/// Everything needed to audit one round's compression.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub round: usize,
    /// Mask handed to clients; `None` for no shared part.
    pub client_mask: Option<MaskBitmap>,
    pub clients: Vec<ClientTrace>,
    /// The update applied to the model; `None` for a skipped round.
    pub applied: Option<Delta>,
    pub next_mask: Option<MaskBitmap>,
    pub regenerated: bool,
}

/// Download size for a client whose last sync was `rounds_skipped` rounds
/// before the upcoming one.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StalenessPoint {
    pub rounds_skipped: usize,
    pub changed_params: usize,
    pub download_bytes: usize,
}

struct Work {
    client: usize,
    group: GroupTag,
    weight: f64,
    compensated: ParamVec,
    split: SplitUpdate<f64>,
    stats_delta: ParamVec,
}

/// Builds all data up front, then advances one round per `step`.
pub struct Engine {
    cfg: ExperimentConfig,
    model: Model,
    params: ParamVec,
    stats: ParamVec,
    test: Dataset,
    shards: Vec<ClientShard>,
    p: Vec<f64>,
    sampling: SamplingParams,
    sticky: StickyState,
    sampling_rng: SimRng,
    profiles: Vec<ClientProfile>,
    plan: OvercommitPlan,
    vv: ServerVersionVector,
    mask: Option<SharedMaskState>,
    store: CompensationStore<f64>,
    round: usize,
    cum_down: u64,
    cum_up: u64,
    trace: bool,
    last_trace: Option<RoundTrace>,
}

fn load_data(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let mut rng = stream(cfg.seed, Stream::Data);
    match &cfg.dataset {
        DatasetConfig::Synthetic { classes, dim, total, separation } => {
            let spec = SyntheticSpec { classes: *classes, dim: *dim, total: *total, separation: *separation };
            generate_synthetic(&spec, &mut rng)
        }
        DatasetConfig::Csv { path, test_fraction } => split_train_test(load_csv(path)?, *test_fraction, &mut rng),
    }
}

impl Engine {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let (train, test) = load_data(&cfg)?;
        let shards = partition_dirichlet(&train, cfg.n, &cfg.partition, &mut stream(cfg.seed, Stream::Partition))?;
        let n = shards.len();
        if n < cfg.k {
            return Err(Error::Config(format!("only {n} clients survive partitioning, fewer than k={}", cfg.k)));
        }
        let p = client_weights(&shards, cfg.p_mode);

        let sticky_mode = cfg.sampling_mode() == SamplingMode::Sticky;
        let sampling = if sticky_mode {
            cfg.check_sticky(n)?;
            SamplingParams::sticky(n, cfg.k, cfg.sticky_size(), cfg.sticky_used())?
        } else {
            SamplingParams::uniform(n, cfg.k)?
        };
        let plan = if sticky_mode {
            plan_overcommit(cfg.k, sampling.c, cfg.oc, cfg.f_sticky)?
        } else {
            plan_overcommit(cfg.k, 0, cfg.oc, Some(0.0))?
        };
        if sampling.c + plan.extra_sticky > sampling.s || sampling.k - sampling.c + plan.extra_fresh > n - sampling.s {
            return Err(Error::Config(format!(
                "over-commitment needs {} sticky and {} fresh draws, pools hold {} and {}",
                sampling.c + plan.extra_sticky,
                sampling.k - sampling.c + plan.extra_fresh,
                sampling.s,
                n - sampling.s
            )));
        }

        let mut sampling_rng = stream(cfg.seed, Stream::Sampling);
        let sticky = StickyState::new(sampling, &mut sampling_rng)?;
        let profiles = sample_profiles(n, &cfg.network, &mut stream(cfg.seed, Stream::Profiles))?;

        let spec = ModelSpec::new(cfg.model.clone(), train.dim, train.classes.max(test.classes))?;
        let model = Model::new(spec);
        let params = model.init_params(&mut stream(cfg.seed, Stream::Init));
        let stats = model.init_stats();
        let d = params.len();
        let mask = if cfg.strategy.update_kind() == UpdateKind::Masked {
            Some(SharedMaskState::new(d, cfg.q, cfg.q_shr, cfg.regen_interval(), cfg.regen_mode)?)
        } else {
            ratio_to_count(cfg.q, d)?;
            None
        };
        Ok(Self {
            vv: ServerVersionVector::new(d, n),
            cfg,
            model,
            params,
            stats,
            test,
            shards,
            p,
            sampling,
            sticky,
            sampling_rng,
            profiles,
            plan,
            mask,
            store: CompensationStore::new(),
            round: 1,
            cum_down: 0,
            cum_up: 0,
            trace: false,
            last_trace: None,
        })
    }

    /// Keep a `RoundTrace` of every subsequent round.
    pub fn enable_trace(&mut self, on: bool) {
        self.trace = on;
    }

    pub fn last_trace(&self) -> Option<&RoundTrace> {
        self.last_trace.as_ref()
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn params(&self) -> &ParamVec {
        &self.params
    }

    pub fn stats(&self) -> &ParamVec {
        &self.stats
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn shards(&self) -> &[ClientShard] {
        &self.shards
    }

    pub fn client_weights(&self) -> &[f64] {
        &self.p
    }

    pub fn sampling_params(&self) -> &SamplingParams {
        &self.sampling
    }

    pub fn sticky_state(&self) -> &StickyState {
        &self.sticky
    }

    pub fn overcommit_plan(&self) -> &OvercommitPlan {
        &self.plan
    }

    pub fn version_vector(&self) -> &ServerVersionVector {
        &self.vv
    }

    pub fn mask_state(&self) -> Option<&SharedMaskState> {
        self.mask.as_ref()
    }

    pub fn compensation_store(&self) -> &CompensationStore<f64> {
        &self.store
    }

    /// The round `step` will run next.
    pub fn next_round(&self) -> usize {
        self.round
    }

    fn mask_bytes(&self) -> usize {
        match &self.mask {
            Some(_) if self.cfg.charge_mask => self.dim().div_ceil(8),
            _ => 0,
        }
    }

    fn stats_bytes(&self) -> usize {
        4 * self.stats.len()
    }

    fn upload_bytes(&self, shared: usize, unique: usize) -> usize {
        let d = self.dim();
        let wire = Default::default();
        let body = match self.cfg.strategy.update_kind() {
            UpdateKind::Dense => Encoding::Dense.byte_size(d, d, wire),
            UpdateKind::TopK => self.cfg.encoding.byte_size(d, unique, wire),
            // the mask is known to both sides, so shared values need no index
            UpdateKind::Masked => 4 * shared + self.cfg.encoding.byte_size(d, unique, wire),
        };
        body + self.stats_bytes()
    }

    /// Download sizes against the current model for every possible
    /// staleness, from consecutive participation up to the first round.
    pub fn staleness_curve(&self) -> Vec<StalenessPoint> {
        let upcoming = self.round;
        let mask_bytes = self.mask_bytes();
        let d = self.dim();
        let dense = Encoding::Dense.byte_size(d, d, Default::default());
        let mut stamps: Vec<usize> = self.vv.last_changed().to_vec();
        stamps.sort_unstable();
        (1..upcoming)
            .map(|skip| {
                let version = upcoming - skip;
                let changed = d - stamps.partition_point(|&v| v <= version);
                let bytes = self.cfg.encoding.byte_size(d, changed, Default::default()).min(dense);
                StalenessPoint {
                    rounds_skipped: skip,
                    changed_params: changed,
                    download_bytes: bytes + mask_bytes + self.stats_bytes(),
                }
            })
            .collect()
    }

    fn weight(&self, client: usize, group: GroupTag) -> Result<f64> {
        if self.cfg.strategy.equal_weights() {
            Ok(1.0 / self.cfg.k as f64)
        } else {
            aggregation_weight(group, self.p[client], &self.sampling)
        }
    }

    /// Runs one round and returns its metrics.
    pub fn step(&mut self) -> Result<RoundMetrics> {
        let t = self.round;
        let cfg = &self.cfg;
        let d = self.dim();
        let sticky_mode = !self.sampling.is_uniform();
        let (c, k) = (self.sampling.c, self.sampling.k);

        // sample, with the over-commit extras
        let draw = sample_groups(
            &self.sticky,
            c + self.plan.extra_sticky,
            k - c + self.plan.extra_fresh,
            &mut self.sampling_rng,
        )?;
        let fresh_tag = if sticky_mode { GroupTag::Fresh } else { GroupTag::Uniform };

        // compression budgets for this round
        let (client_mask, k_shared, k_unique) = match &self.mask {
            Some(m) => (m.client_mask(t).cloned(), m.shared_count(t), m.unique_count(t)),
            None => (None, 0, ratio_to_count(cfg.q, d)?),
        };
        let mask_bytes = self.mask_bytes();
        let upload = self.upload_bytes(k_shared, k_unique);

        // every online participant downloads before training
        let mut avail = substream(cfg.seed, Stream::Availability, t as u64, 0);
        let jitter = if cfg.network.compute_jitter > 0.0 {
            Some(LogNormal::new(0.0, cfg.network.compute_jitter).map_err(|e| Error::invalid(e.to_string()))?)
        } else {
            None
        };
        let mut participants = Vec::new();
        let drawn = draw
            .sticky_selected
            .iter()
            .map(|&i| (i, GroupTag::Sticky))
            .chain(draw.fresh_selected.iter().map(|&i| (i, fresh_tag)));
        for (client, group) in drawn {
            let offline = avail.random::<f64>() < cfg.p_offline;
            let compute_scale = match &jitter {
                Some(j) => j.sample(&mut substream(cfg.seed, Stream::Jitter, client as u64, t as u64)),
                None => 1.0,
            };
            let download = if offline {
                0
            } else {
                downstream_payload(&self.vv, client, t, cfg.encoding, mask_bytes) + self.stats_bytes()
            };
            participants.push(Participant {
                client,
                group,
                download_bytes: download,
                upload_bytes: upload,
                compute_scale,
                offline,
            });
        }
        for p in participants.iter().filter(|p| !p.offline) {
            self.vv.sync(p.client, t);
        }
        let dv_all: u64 = participants.iter().map(|p| p.download_bytes as u64).sum();

        let need_sticky = if sticky_mode { c } else { 0 };
        let timing = match simulate_round_timing(
            t,
            &participants,
            &self.profiles,
            cfg.local_steps,
            need_sticky,
            k - need_sticky,
        ) {
            Ok(timing) => timing,
            Err(Error::Dropout { .. }) if cfg.on_dropout == DropoutPolicy::Skip => {
                return self.finish_skipped(t, dv_all, client_mask);
            }
            Err(e) => return Err(e),
        };

        let used: Vec<(usize, GroupTag)> = timing
            .used_sticky
            .iter()
            .map(|&i| (i, GroupTag::Sticky))
            .chain(timing.used_fresh.iter().map(|&i| (i, fresh_tag)))
            .collect();
        // ascending client id fixes the floating-point summation order
        let mut weighted: Vec<(usize, GroupTag, f64)> =
            used.iter().map(|&(i, g)| Ok((i, g, self.weight(i, g)?))).collect::<Result<_>>()?;
        weighted.sort_by_key(|w| w.0);
        let dv_used: u64 = participants
            .iter()
            .filter(|p| used.iter().any(|&(i, _)| i == p.client))
            .map(|p| p.download_bytes as u64)
            .sum();
        let uv = (upload * used.len()) as u64;

        // local work of the used clients; stragglers' results would be discarded
        let train_cfg = LocalTrainConfig {
            local_steps: cfg.local_steps,
            batch_size: cfg.batch_size,
            lr: scheduled_lr_with(cfg.lr, t, cfg.lr_decay, cfg.lr_decay_every),
            momentum: cfg.momentum,
        };
        let mode = cfg.compensation();
        let kind = cfg.strategy.update_kind();
        let encoding = cfg.encoding;
        let work: Vec<Work> = weighted
            .par_iter()
            .map(|&(client, group, weight)| {
                let mut rng = substream(cfg.seed, Stream::Training, client as u64, t as u64);
                let update = local_train(
                    &self.model,
                    &self.params,
                    &self.stats,
                    &self.shards[client].examples,
                    &train_cfg,
                    &mut rng,
                )?;
                let compensated = self.store.compensate(client, &update.delta, weight, mode)?;
                let split = match kind {
                    UpdateKind::Dense => SplitUpdate {
                        shared: Delta::empty(d, encoding),
                        unique: encode_sparse(&compensated, &(0..d).collect::<Vec<_>>(), Encoding::Dense)?,
                        residual: ParamVec::zeros(d),
                    },
                    UpdateKind::TopK => {
                        let (unique, residual) = sparsify_top_k(&compensated, k_unique, encoding)?;
                        SplitUpdate { shared: Delta::empty(d, encoding), unique, residual }
                    }
                    UpdateKind::Masked => split_masked_update(&compensated, client_mask.as_ref(), k_unique, encoding)?,
                };
                Ok(Work { client, group, weight, compensated, split, stats_delta: update.stats_delta })
            })
            .collect::<Result<_>>()?;

        // aggregate
        let weight_sum: f64 = work.iter().map(|w| w.weight).sum();
        let mut regenerated = false;
        let applied: Delta = match kind {
            UpdateKind::Dense => {
                let items: Vec<(f64, &ParamVec)> = work.iter().map(|w| (w.weight, &w.compensated)).collect();
                let next = weighted_aggregate(&self.params, &items)?;
                let delta = next.sub(&self.params)?;
                self.params = next;
                encode_sparse(&delta, &(0..d).collect::<Vec<_>>(), Encoding::Dense)?
            }
            UpdateKind::TopK => {
                let items: Vec<(f64, &Delta)> = work.iter().map(|w| (w.weight, &w.split.unique)).collect();
                let (next, update) = sparse_topk_aggregate(&self.params, &items, k_unique, encoding)?;
                self.params = next;
                update
            }
            UpdateKind::Masked => {
                let contribs: Vec<WeightedContribution<f64>> = work
                    .iter()
                    .map(|w| WeightedContribution {
                        client: w.client,
                        group: w.group,
                        weight: w.weight,
                        shared: w.split.shared.clone(),
                        unique: w.split.unique.clone(),
                    })
                    .collect();
                let agg = gluefl_aggregate(&self.params, &contribs, client_mask.as_ref(), k_unique, encoding)?;
                self.params = agg.params;
                let state = self.mask.as_mut().expect("masked strategy has a mask");
                let source = if state.is_regeneration_round(t) && state.mode() == RegenMode::Combined {
                    encode_sparse(&agg.uploaded_sum, &(0..d).collect::<Vec<_>>(), encoding)?
                } else {
                    agg.combined.clone()
                };
                regenerated = advance_shared_mask(state, &source, t)?;
                agg.combined
            }
        };
        if self.model.has_stats() {
            let deltas: Vec<ParamVec> = work.iter().map(|w| w.stats_delta.clone()).collect();
            self.stats = bn_stat_aggregate(&self.stats, &deltas)?;
        }
        self.vv.record_update(t, applied.indices().iter().copied());
        if mode != CompensationMode::None {
            for w in &work {
                self.store.record(w.client, w.split.residual.clone(), w.weight, t);
            }
        }
        update_sticky_group(&mut self.sticky, &timing.used_sticky, &timing.used_fresh, &mut self.sampling_rng)?;

        if self.trace {
            self.last_trace = Some(RoundTrace {
                round: t,
                client_mask,
                clients: work
                    .into_iter()
                    .map(|w| ClientTrace {
                        client: w.client,
                        group: w.group,
                        weight: w.weight,
                        compensated: w.compensated,
                        split: w.split,
                    })
                    .collect(),
                applied: Some(applied),
                next_mask: self.mask.as_ref().and_then(|m| m.mask().cloned()),
                regenerated,
            });
        }

        let eval = evaluate(&self.model, &self.params, &self.stats, &self.test.examples)?;
        self.cum_down += dv_all;
        self.cum_up += uv;
        self.round += 1;
        Ok(RoundMetrics {
            round: t,
            test_acc: eval.accuracy,
            test_loss: eval.loss,
            dv_used,
            dv_all,
            uv,
            cum_down: self.cum_down,
            cum_up: self.cum_up,
            round_wall_time: timing.wall_time,
            slowest_used_download_s: timing.slowest_used_download_s,
            mask_regenerated: regenerated,
            weight_sum,
        })
    }

    fn finish_skipped(&mut self, t: usize, dv_all: u64, client_mask: Option<MaskBitmap>) -> Result<RoundMetrics> {
        if self.trace {
            self.last_trace = Some(RoundTrace {
                round: t,
                client_mask,
                clients: Vec::new(),
                applied: None,
                next_mask: self.mask.as_ref().and_then(|m| m.mask().cloned()),
                regenerated: false,
            });
        }
        let eval = evaluate(&self.model, &self.params, &self.stats, &self.test.examples)?;
        self.cum_down += dv_all;
        self.round += 1;
        Ok(RoundMetrics {
            round: t,
            test_acc: eval.accuracy,
            test_loss: eval.loss,
            dv_used: 0,
            dv_all,
            uv: 0,
            cum_down: self.cum_down,
            cum_up: self.cum_up,
            round_wall_time: 0.0,
            slowest_used_download_s: 0.0,
            mask_regenerated: false,
            weight_sum: 0.0,
        })
    }
}
