use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trailing window for the reported accuracy.
pub const ACCURACY_WINDOW: usize = 5;

/// One row of `metrics.csv`. Byte counts are per round except the two
/// cumulative columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: usize,
    pub test_acc: f64,
    pub test_loss: f64,
    /// Downloads by the clients whose updates were aggregated.
    pub dv_used: u64,
    /// Downloads by every online participant, stragglers included.
    pub dv_all: u64,
    /// Uploads by the aggregated clients; stragglers are cancelled.
    pub uv: u64,
    /// Running total of `dv_all`.
    pub cum_down: u64,
    /// Running total of `uv`.
    pub cum_up: u64,
    pub round_wall_time: f64,
    pub slowest_used_download_s: f64,
    pub mask_regenerated: bool,
    /// Sum of the aggregation weights actually applied.
    pub weight_sum: f64,
}

pub fn write_metrics_csv<W: Write>(out: W, metrics: &[RoundMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for m in metrics {
        w.serialize(m)?;
    }
    if metrics.is_empty() {
        w.write_record([
            "round",
            "test_acc",
            "test_loss",
            "dv_used",
            "dv_all",
            "uv",
            "cum_down",
            "cum_up",
            "round_wall_time",
            "slowest_used_download_s",
            "mask_regenerated",
            "weight_sum",
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_csv<R: std::io::Read>(input: R) -> Result<Vec<RoundMetrics>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<_>, _>>()?)
}

/// Trailing moving average of `test_acc`; the first rounds average what
/// is available.
pub fn moving_average(metrics: &[RoundMetrics], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(metrics.len());
    let mut sum = 0.0;
    for (i, m) in metrics.iter().enumerate() {
        sum += m.test_acc;
        if i >= window {
            sum -= metrics[i - window].test_acc;
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// Totals up to the round where the averaged accuracy first reaches the
/// target, or over the whole run when it never does.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub target_accuracy: Option<f64>,
    pub target_round: Option<usize>,
    /// Rounds covered by the totals below.
    pub rounds_counted: usize,
    pub final_avg_accuracy: f64,
    pub best_avg_accuracy: f64,
    /// Downstream bytes, stragglers included.
    pub dv_bytes: u64,
    pub dv_used_bytes: u64,
    pub uv_bytes: u64,
    /// `dv_bytes + uv_bytes`.
    pub tv_bytes: u64,
    /// Sum of the slowest used download time per round.
    pub dt_s: f64,
    /// Sum of round wall times.
    pub tt_s: f64,
}

pub fn summarize_run(metrics: &[RoundMetrics], target: Option<f64>) -> Result<RunSummary> {
    if metrics.is_empty() {
        return Err(Error::invalid("cannot summarize an empty run"));
    }
    let avg = moving_average(metrics, ACCURACY_WINDOW);
    let hit = target.and_then(|t| avg.iter().position(|&a| a >= t));
    let upto = hit.map_or(metrics.len(), |i| i + 1);
    let counted = &metrics[..upto];
    let dv: u64 = counted.iter().map(|m| m.dv_all).sum();
    let uv: u64 = counted.iter().map(|m| m.uv).sum();
    Ok(RunSummary {
        target_accuracy: target,
        target_round: hit.map(|i| metrics[i].round),
        rounds_counted: upto,
        final_avg_accuracy: *avg.last().expect("non-empty"),
        best_avg_accuracy: avg.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        dv_bytes: dv,
        dv_used_bytes: counted.iter().map(|m| m.dv_used).sum(),
        uv_bytes: uv,
        tv_bytes: dv + uv,
        dt_s: counted.iter().map(|m| m.slowest_used_download_s).sum(),
        tt_s: counted.iter().map(|m| m.round_wall_time).sum(),
    })
}
