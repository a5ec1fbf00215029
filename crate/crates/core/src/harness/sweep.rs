use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::{run_to_dir, SummaryFile};
use crate::error::{Error, Result};

/// Dotted config keys mapped to the values to try, e.g.
/// `"partition.alpha" = [0.1, 1.0]`.
pub type Grid = BTreeMap<String, Vec<toml::Value>>;

pub fn parse_grid(text: &str) -> Result<Grid> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut grid = Grid::new();
    flatten("", &toml::Value::Table(table), &mut grid)?;
    if grid.values().any(Vec::is_empty) {
        return Err(Error::Config("grid axes must list at least one value".into()));
    }
    Ok(grid)
}

// Accepts both quoted dotted keys and nested tables.
fn flatten(prefix: &str, value: &toml::Value, grid: &mut Grid) -> Result<()> {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, grid)?;
            }
            Ok(())
        }
        toml::Value::Array(values) => {
            grid.insert(prefix.to_owned(), values.clone());
            Ok(())
        }
        _ => Err(Error::Config(format!("grid key {prefix} must map to a list of values"))),
    }
}

fn set_path(root: &mut toml::Table, key: &str, value: toml::Value) {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("split yields at least one part");
    let mut table = root;
    for part in parts {
        table = table
            .entry(part)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .expect("intermediate grid key must be a table");
    }
    table.insert(last.to_owned(), value);
}

/// One point of the grid: its overrides and the resulting config.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub overrides: BTreeMap<String, toml::Value>,
    pub config: ExperimentConfig,
}

/// Cartesian product of the grid axes in key order, later keys varying fastest.
pub fn expand_grid(base: &ExperimentConfig, grid: &Grid) -> Result<Vec<SweepPoint>> {
    let base_text = base.to_toml_string()?;
    let mut points = vec![BTreeMap::new()];
    for (key, values) in grid {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(key.clone(), v.clone());
                    q
                })
            })
            .collect();
    }
    points
        .into_iter()
        .map(|overrides| {
            let mut table: toml::Table = toml::from_str(&base_text).map_err(|e| Error::Config(e.to_string()))?;
            for (k, v) in &overrides {
                if table.get(k.split('.').next().unwrap_or("")).is_some_and(|v| !v.is_table()) && k.contains('.') {
                    return Err(Error::Config(format!("grid key {k} descends into a non-table value")));
                }
                set_path(&mut table, k, v.clone());
            }
            let text = toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?;
            let config = ExperimentConfig::from_toml_str(&text)
                .map_err(|e| Error::Config(format!("grid point {}: {e}", describe(&overrides))))?;
            Ok(SweepPoint { overrides, config })
        })
        .collect()
}

fn describe(overrides: &BTreeMap<String, toml::Value>) -> String {
    overrides.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Serialize)]
struct IndexRow {
    run: String,
    overrides: String,
    target_round: Option<usize>,
    final_avg_accuracy: f64,
    dv_bytes: u64,
    uv_bytes: u64,
    dt_s: f64,
    tt_s: f64,
}

/// Runs every grid point into `out/run-NNN/` and writes `out/sweep.csv`.
pub fn run_sweep(base: &ExperimentConfig, grid: &Grid, out: &Path, parallel: bool) -> Result<Vec<SummaryFile>> {
    let points = expand_grid(base, grid)?;
    fs::create_dir_all(out)?;
    let run_one = |(i, p): (usize, &SweepPoint)| run_to_dir(&p.config, &out.join(format!("run-{i:03}")));
    let summaries: Vec<SummaryFile> = if parallel {
        points.par_iter().enumerate().map(run_one).collect::<Result<_>>()?
    } else {
        points.iter().enumerate().map(run_one).collect::<Result<_>>()?
    };
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    for (i, (p, s)) in points.iter().zip(&summaries).enumerate() {
        w.serialize(IndexRow {
            run: format!("run-{i:03}"),
            overrides: describe(&p.overrides),
            target_round: s.summary.target_round,
            final_avg_accuracy: s.summary.final_avg_accuracy,
            dv_bytes: s.summary.dv_bytes,
            uv_bytes: s.summary.uv_bytes,
            dt_s: s.summary.dt_s,
            tt_s: s.summary.tt_s,
        })?;
    }
    w.flush()?;
    Ok(summaries)
}
