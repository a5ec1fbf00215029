use fedsync::data::{Example, PartitionSpec, WeightMode};
use fedsync::harness::{DatasetConfig, DropoutPolicy, Engine, ExperimentConfig, SamplingMode, Strategy};
use fedsync::rng::{substream, Stream};
use fedsync::training::{Activation, ModelKind};
use fedsync::{Error, ParamVec};
use rand::Rng;

fn small(strategy: Strategy, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        strategy,
        seed,
        rounds: 50,
        n: 40,
        k: 5,
        lr: 0.02,
        regen_interval: 7,
        dataset: DatasetConfig::Synthetic { classes: 4, dim: 15, total: 2000, separation: 3.0 },
        partition: PartitionSpec { alpha: 0.5, min_size: 10 },
        ..ExperimentConfig::default()
    }
}

#[test]
fn stale_copy_plus_changed_positions_rebuilds_model() {
    for (strategy, seed) in
        [(Strategy::Gluefl, 3), (Strategy::Stc, 4), (Strategy::Fedavg, 5), (Strategy::GlueflNoRegen, 6)]
    {
        let cfg = small(strategy, seed);
        let mut engine = Engine::new(cfg.clone()).unwrap();
        // snapshots[v] is the model sent at the start of round v
        let mut snapshots: Vec<ParamVec> = vec![ParamVec::zeros(0)];
        for _ in 0..cfg.rounds {
            snapshots.push(engine.params().clone());
            engine.step().unwrap();
            let current = engine.params();
            for (v, stale) in snapshots.iter().enumerate().skip(1) {
                let mut rebuilt = stale.clone();
                for j in engine.version_vector().changed_since(v) {
                    rebuilt[j] = current[j];
                }
                let off = rebuilt.iter().zip(current.iter()).filter(|(a, b)| a.to_bits() != b.to_bits()).count();
                assert_eq!(off, 0, "{strategy:?}: version {v} after round {}", engine.next_round() - 1);
            }
        }
    }
}

#[test]
fn two_client_fedavg_matches_centralized_sgd() {
    let cfg = ExperimentConfig {
        strategy: Strategy::Fedavg,
        seed: 9,
        rounds: 25,
        n: 2,
        k: 2,
        oc: 1.0,
        local_steps: 1,
        batch_size: 8,
        lr: 0.1,
        momentum: 0.0,
        lr_decay: 1.0,
        p_mode: WeightMode::Uniform,
        dataset: DatasetConfig::Synthetic { classes: 3, dim: 5, total: 500, separation: 2.0 },
        partition: PartitionSpec { alpha: 1.0, min_size: 8 },
        model: ModelKind::Mlp { hidden: vec![4], activation: Activation::Tanh },
        ..ExperimentConfig::default()
    };
    let mut engine = Engine::new(cfg.clone()).unwrap();
    assert_eq!(engine.shards().len(), 2);
    let model = engine.model().clone();
    let stats = engine.stats().clone();
    let mut w = engine.params().clone();
    for t in 1..=cfg.rounds {
        // one minibatch per client, drawn from the same per-client stream the engine uses
        let mut batch: Vec<&Example> = Vec::new();
        for (i, shard) in engine.shards().iter().enumerate() {
            let mut rng = substream(cfg.seed, Stream::Training, i as u64, t as u64);
            batch.extend((0..cfg.batch_size).map(|_| &shard.examples[rng.random_range(0..shard.examples.len())]));
        }
        let (_, grad) = model.loss_and_grad(&w, &stats, &batch).unwrap();
        w.axpy(-cfg.lr, &grad).unwrap();
        let m = engine.step().unwrap();
        assert_eq!(m.weight_sum, 1.0);
        for (a, b) in engine.params().iter().zip(w.iter()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "round {t}: {a} vs {b}");
        }
    }
}

#[test]
fn weights_sum_to_one_for_uniform_p_in_sticky_mode() {
    for strategy in [Strategy::Gluefl, Strategy::GlueflNoEc, Strategy::Fedavg] {
        let cfg = ExperimentConfig {
            p_mode: WeightMode::Uniform,
            sampling: Some(SamplingMode::Sticky),
            rounds: 30,
            ..small(strategy, 2)
        };
        let mut engine = Engine::new(cfg).unwrap();
        for _ in 0..30 {
            let m = engine.step().unwrap();
            assert!((m.weight_sum - 1.0).abs() <= 1e-12, "{strategy:?} round {}: {}", m.round, m.weight_sum);
        }
    }
}

#[test]
fn cumulative_columns_never_decrease() {
    let cfg = ExperimentConfig {
        network: fedsync::netsim::NetworkConfig { compute_jitter: 0.4, ..Default::default() },
        ..small(Strategy::Gluefl, 8)
    };
    let out = fedsync::harness::run_experiment(&cfg).unwrap();
    let mut prev = (0, 0);
    for (i, m) in out.metrics.iter().enumerate() {
        assert_eq!(m.round, i + 1);
        assert_eq!(m.cum_down, prev.0 + m.dv_all);
        assert_eq!(m.cum_up, prev.1 + m.uv);
        assert!(m.dv_used <= m.dv_all);
        prev = (m.cum_down, m.cum_up);
    }
}

#[test]
fn dropout_surfaces_or_skips() {
    let base = ExperimentConfig { oc: 1.0, p_offline: 0.5, rounds: 20, ..small(Strategy::Gluefl, 1) };
    let mut engine = Engine::new(base.clone()).unwrap();
    let err =
        (0..20).find_map(|_| engine.step().err()).expect("half the clients offline without over-commit must drop out");
    assert!(matches!(err, Error::Dropout { .. }), "{err}");

    let mut engine = Engine::new(ExperimentConfig { on_dropout: DropoutPolicy::Skip, ..base }).unwrap();
    let (mut skipped, mut charged) = (0, 0);
    for _ in 0..20 {
        let before = engine.params().clone();
        let m = engine.step().unwrap();
        if m.uv == 0 {
            skipped += 1;
            assert_eq!(engine.params(), &before);
            assert_eq!(m.dv_used, 0);
            // online participants downloaded before the round was abandoned
            charged += usize::from(m.dv_all > 0);
        }
    }
    assert!(skipped > 0 && charged > 0);
}

#[test]
fn unknown_config_keys_rejected() {
    assert!(ExperimentConfig::from_toml_str("rounds = 3\nlearning_rate = 0.1\n").is_err());
    assert!(ExperimentConfig::from_toml_str(
        "[dataset]\nkind = \"synthetic\"\nclasses = 2\ndim = 2\ntotal = 100\nseparation = 1.0\nextra = 1\n"
    )
    .is_err());
    let cfg = ExperimentConfig::from_toml_str("strategy = \"stc\"\nrounds = 3\n").unwrap();
    assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap(), cfg);
}
