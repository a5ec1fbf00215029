use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ratio_to_count, top_k_among, MaskBitmap, Scalar, SparseDelta};

/// What happens in a regeneration round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegenMode {
    /// Clients get an empty shared mask and spend their whole budget on
    /// unique positions; the next mask is the top of that unique update.
    #[default]
    EmptyMask,
    /// Client budgets are unchanged; the next mask is taken from the dense
    /// weighted sum of everything clients uploaded, before server-side
    /// sparsification.
    Combined,
}

/// Server-side shared mask with its regeneration schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedMaskState {
    dim: usize,
    q: f64,
    q_shr: f64,
    /// `None` disables regeneration.
    interval: Option<usize>,
    mode: RegenMode,
    /// Absent until the first aggregated update exists.
    mask: Option<MaskBitmap>,
    last_regen: usize,
}

impl SharedMaskState {
    pub fn new(dim: usize, q: f64, q_shr: f64, interval: Option<usize>, mode: RegenMode) -> Result<Self> {
        if !(0.0 <= q_shr && q_shr < q && q <= 1.0) {
            return Err(Error::invalid(format!("need 0 <= q_shr < q <= 1, got q={q}, q_shr={q_shr}")));
        }
        if interval == Some(0) {
            return Err(Error::invalid("regeneration interval must be at least 1"));
        }
        ratio_to_count(q, dim)?;
        Ok(Self { dim, q, q_shr, interval, mode, mask: None, last_regen: 0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn q_shr(&self) -> f64 {
        self.q_shr
    }

    pub fn mode(&self) -> RegenMode {
        self.mode
    }

    pub fn interval(&self) -> Option<usize> {
        self.interval
    }

    pub fn mask(&self) -> Option<&MaskBitmap> {
        self.mask.as_ref()
    }

    /// Rounds are numbered from 1; with interval `I` the regeneration rounds
    /// are `I, 2I, 3I, ...`.
    pub fn is_regeneration_round(&self, round: usize) -> bool {
        self.interval.is_some_and(|i| round >= self.last_regen + i)
    }

    /// Mask handed to clients in `round`; `None` means "no shared part".
    pub fn client_mask(&self, round: usize) -> Option<&MaskBitmap> {
        if self.is_regeneration_round(round) && self.mode == RegenMode::EmptyMask {
            None
        } else {
            self.mask.as_ref()
        }
    }

    pub fn effective_q_shr(&self, round: usize) -> f64 {
        if self.client_mask(round).is_some() {
            self.q_shr
        } else {
            0.0
        }
    }

    /// Shared positions per client this round.
    pub fn shared_count(&self, round: usize) -> usize {
        self.client_mask(round).map_or(0, MaskBitmap::cardinality)
    }

    /// Unique positions per client: whatever of the total budget the shared
    /// part does not use.
    pub fn unique_count(&self, round: usize) -> usize {
        let total = ratio_to_count(self.q, self.dim).expect("validated ratio");
        total - self.shared_count(round)
    }

    pub fn mask_count(&self) -> usize {
        ratio_to_count(self.q_shr, self.dim).expect("validated ratio")
    }
}

/// Moves the mask to the `ratio_to_count(q_shr, d)` largest-magnitude
/// positions of `combined` among its support, padding with the lowest
/// unsupported indices when the support is too small. Returns whether
/// `round` was a regeneration round.
pub fn advance_shared_mask<T: Scalar>(
    state: &mut SharedMaskState,
    combined: &SparseDelta<T>,
    round: usize,
) -> Result<bool> {
    if combined.dim() != state.dim {
        return Err(Error::invalid(format!("update dimension {} != mask dimension {}", combined.dim(), state.dim)));
    }
    let k = state.mask_count();
    let mut dense = vec![T::zero(); state.dim];
    for (j, v) in combined.iter() {
        dense[j] = v;
    }
    let support = combined.indices();
    let mut chosen = top_k_among(&dense, support, k.min(support.len()))?;
    if chosen.len() < k {
        let have = combined.support();
        chosen.extend(have.zeros().take(k - chosen.len()));
    }
    let regenerated = state.is_regeneration_round(round);
    if regenerated {
        state.last_regen = round;
    }
    state.mask = Some(MaskBitmap::from_indices(state.dim, &chosen)?);
    Ok(regenerated)
}
