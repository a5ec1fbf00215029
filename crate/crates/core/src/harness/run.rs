use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::engine::{Engine, StalenessPoint};
use super::metrics::{summarize_run, write_metrics_csv, RoundMetrics, RunSummary};
use crate::error::Result;
use crate::ParamVec;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub metrics: Vec<RoundMetrics>,
    pub params: ParamVec,
    pub stats: ParamVec,
    pub staleness: Vec<StalenessPoint>,
    /// Clients left after small shards were dropped.
    pub clients: usize,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub summary: RunSummary,
    pub clients: usize,
    pub param_count: usize,
    pub config: ExperimentConfig,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let mut engine = Engine::new(cfg.clone())?;
    let metrics = (0..cfg.rounds).map(|_| engine.step()).collect::<Result<Vec<_>>>()?;
    Ok(RunOutput {
        metrics,
        staleness: engine.staleness_curve(),
        params: engine.params().clone(),
        stats: engine.stats().clone(),
        clients: engine.shards().len(),
    })
}

/// Writes `metrics.csv`, `staleness.csv` and `summary.json` into `dir`.
pub fn write_run_outputs(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput) -> Result<SummaryFile> {
    fs::create_dir_all(dir)?;
    write_metrics_csv(fs::File::create(dir.join("metrics.csv"))?, &out.metrics)?;
    let mut w = csv::Writer::from_path(dir.join("staleness.csv"))?;
    for p in &out.staleness {
        w.serialize(p)?;
    }
    w.flush()?;
    let summary = SummaryFile {
        summary: summarize_run(&out.metrics, cfg.target_accuracy)?,
        clients: out.clients,
        param_count: out.params.len(),
        config: cfg.clone(),
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<SummaryFile> {
    let out = run_experiment(cfg)?;
    write_run_outputs(dir, cfg, &out)
}
