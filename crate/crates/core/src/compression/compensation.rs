use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ParamVector, Scalar};

/// How a client's stored residual is replayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompensationMode {
    /// Residuals are discarded.
    None,
    /// Residual added back as-is.
    Unscaled,
    /// Residual scaled by `nu_last / nu_now`.
    #[default]
    Rescaled,
}

/// What a client kept back the last time it participated.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensationRecord<T> {
    pub residual: ParamVector<T>,
    /// Aggregation weight applied in that round.
    pub weight: f64,
    pub round: usize,
}

/// `delta + (nu_last / nu_now) * h`; unchanged when there is no record.
pub fn compensate_delta<T: Scalar>(
    delta: &ParamVector<T>,
    record: Option<&CompensationRecord<T>>,
    nu_now: f64,
) -> Result<ParamVector<T>> {
    if !(nu_now > 0.0) {
        return Err(Error::invalid(format!("current weight {nu_now} must be positive")));
    }
    let mut out = delta.clone();
    if let Some(rec) = record {
        out.axpy(T::of(rec.weight / nu_now), &rec.residual)?;
    }
    Ok(out)
}

/// Per-client residuals. Records are created on first participation and
/// never evicted.
#[derive(Debug, Clone, Default)]
pub struct CompensationStore<T> {
    records: BTreeMap<usize, CompensationRecord<T>>,
}

impl<T: Scalar> CompensationStore<T> {
    pub fn new() -> Self {
        Self { records: BTreeMap::new() }
    }

    pub fn get(&self, client: usize) -> Option<&CompensationRecord<T>> {
        self.records.get(&client)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &CompensationRecord<T>)> {
        self.records.iter().map(|(&i, r)| (i, r))
    }

    /// Applies the stored residual for `client` according to `mode`.
    pub fn compensate(
        &self,
        client: usize,
        delta: &ParamVector<T>,
        nu_now: f64,
        mode: CompensationMode,
    ) -> Result<ParamVector<T>> {
        match mode {
            CompensationMode::None => Ok(delta.clone()),
            CompensationMode::Rescaled => compensate_delta(delta, self.get(client), nu_now),
            CompensationMode::Unscaled => {
                let rec = self.get(client).map(|r| CompensationRecord {
                    residual: r.residual.clone(),
                    weight: nu_now,
                    round: r.round,
                });
                compensate_delta(delta, rec.as_ref(), nu_now)
            }
        }
    }

    pub fn record(&mut self, client: usize, residual: ParamVector<T>, weight: f64, round: usize) {
        self.records.insert(client, CompensationRecord { residual, weight, round });
    }
}
