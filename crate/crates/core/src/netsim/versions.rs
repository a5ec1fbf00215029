use serde::{Deserialize, Serialize};

use crate::numerics::Encoding;

/// Server-side record of which parameters changed when, and when each
/// client last downloaded the model.
///
/// Versions count from 1: the model a client receives at the start of round
/// `t` is version `t`, and the update applied at the end of round `t`
/// stamps its positions with `t + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerVersionVector {
    last_changed: Vec<usize>,
    last_sync: Vec<Option<usize>>,
}

impl ServerVersionVector {
    pub fn new(dim: usize, clients: usize) -> Self {
        Self { last_changed: vec![0; dim], last_sync: vec![None; clients] }
    }

    pub fn dim(&self) -> usize {
        self.last_changed.len()
    }

    pub fn last_changed(&self) -> &[usize] {
        &self.last_changed
    }

    pub fn last_sync(&self, client: usize) -> Option<usize> {
        self.last_sync[client]
    }

    /// Marks `client` as holding the round-`round` model.
    pub fn sync(&mut self, client: usize, round: usize) {
        self.last_sync[client] = Some(round);
    }

    /// Stamps the positions changed by round `round`'s update.
    pub fn record_update(&mut self, round: usize, support: impl IntoIterator<Item = usize>) {
        for j in support {
            self.last_changed[j] = round + 1;
        }
    }

    /// Positions changed since the model version `version` was sent.
    pub fn changed_since(&self, version: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.last_changed[j] > version).collect()
    }

    pub fn changed_count_since(&self, version: usize) -> usize {
        self.last_changed.iter().filter(|&&v| v > version).count()
    }
}

/// Bytes `client` downloads at the start of `round`: the full dense model
/// when never synced, otherwise the positions changed since its last sync
/// in `encoding` (never more than the dense cost), plus `mask_bytes` for a
/// distributed shared mask.
pub fn downstream_payload(
    vv: &ServerVersionVector,
    client: usize,
    round: usize,
    encoding: Encoding,
    mask_bytes: usize,
) -> usize {
    debug_assert!(round >= 1);
    let d = vv.dim();
    let dense = Encoding::Dense.byte_size(d, d, Default::default());
    let model = match vv.last_sync(client) {
        None => dense,
        Some(version) => encoding.byte_size(d, vv.changed_count_since(version), Default::default()).min(dense),
    };
    model + mask_bytes
}
