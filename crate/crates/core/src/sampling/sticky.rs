use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SamplingParams;
use crate::error::{Error, Result};

/// Evolving sticky group. Empty in uniform mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StickyState {
    params: SamplingParams,
    /// Ascending client ids.
    members: Vec<usize>,
    #[serde(skip)]
    is_member: Vec<bool>,
}

/// One round's participants, each list in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoundDraw {
    pub sticky_selected: Vec<usize>,
    pub fresh_selected: Vec<usize>,
}

impl RoundDraw {
    pub fn len(&self) -> usize {
        self.sticky_selected.len() + self.fresh_selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl StickyState {
    /// Draws the initial sticky group uniformly from the population.
    pub fn new<R: Rng + ?Sized>(params: SamplingParams, rng: &mut R) -> Result<Self> {
        params.validate()?;
        let mut members = index::sample(rng, params.n, params.s).into_vec();
        members.sort_unstable();
        Ok(Self::from_members(params, members))
    }

    /// Builds a state with a given group; used for fixtures.
    pub fn with_members(params: SamplingParams, mut members: Vec<usize>) -> Result<Self> {
        params.validate()?;
        members.sort_unstable();
        members.dedup();
        if members.len() != params.s || members.iter().any(|&i| i >= params.n) {
            return Err(Error::invalid(format!("sticky group must hold {} distinct ids below {}", params.s, params.n)));
        }
        Ok(Self::from_members(params, members))
    }

    fn from_members(params: SamplingParams, members: Vec<usize>) -> Self {
        let mut is_member = vec![false; params.n];
        for &i in &members {
            is_member[i] = true;
        }
        Self { params, members, is_member }
    }

    pub fn params(&self) -> &SamplingParams {
        &self.params
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, client: usize) -> bool {
        self.is_member.get(client).copied().unwrap_or(false)
    }

    fn non_members(&self) -> Vec<usize> {
        (0..self.params.n).filter(|&i| !self.is_member[i]).collect()
    }
}

fn pick<R: Rng + ?Sized>(rng: &mut R, pool: &[usize], amount: usize) -> Vec<usize> {
    let mut out: Vec<usize> = index::sample(rng, pool.len(), amount).into_iter().map(|i| pool[i]).collect();
    out.sort_unstable();
    out
}

/// Draws `n_sticky` members of the sticky group and `n_fresh` clients from
/// outside it, each uniformly without replacement. In uniform mode the
/// sticky group is empty and `n_fresh` are drawn from the whole population.
pub fn sample_groups<R: Rng + ?Sized>(
    state: &StickyState,
    n_sticky: usize,
    n_fresh: usize,
    rng: &mut R,
) -> Result<RoundDraw> {
    let pool = state.non_members();
    if n_sticky > state.members.len() || n_fresh > pool.len() {
        return Err(Error::invalid(format!(
            "cannot draw {n_sticky} sticky / {n_fresh} fresh from pools of {} / {}",
            state.members.len(),
            pool.len()
        )));
    }
    let sticky_selected = pick(rng, &state.members, n_sticky);
    let fresh_selected = pick(rng, &pool, n_fresh);
    Ok(RoundDraw { sticky_selected, fresh_selected })
}

/// The plain per-round draw: `c` sticky and `k - c` fresh clients.
pub fn sample_round<R: Rng + ?Sized>(state: &StickyState, rng: &mut R) -> RoundDraw {
    let p = state.params;
    sample_groups(state, p.c, p.k - p.c, rng).expect("validated parameters fit the pools")
}

/// End-of-round rebalance: removes `k - c` members uniformly from those not
/// in `selected_sticky`, then admits `used_fresh`. No-op in uniform mode.
pub fn update_sticky_group<R: Rng + ?Sized>(
    state: &mut StickyState,
    selected_sticky: &[usize],
    used_fresh: &[usize],
    rng: &mut R,
) -> Result<()> {
    let p = state.params;
    if p.is_uniform() {
        return Ok(());
    }
    let need = p.k - p.c;
    if used_fresh.len() != need {
        return Err(Error::invalid(format!("expected {need} fresh clients to admit, got {}", used_fresh.len())));
    }
    if let Some(&i) = used_fresh.iter().find(|&&i| i >= p.n || state.contains(i)) {
        return Err(Error::invalid(format!("client {i} is already sticky or out of range")));
    }
    if let Some(&i) = selected_sticky.iter().find(|&&i| !state.contains(i)) {
        return Err(Error::invalid(format!("client {i} is not a sticky member")));
    }
    let mut kept = vec![false; p.n];
    for &i in selected_sticky {
        kept[i] = true;
    }
    let removable: Vec<usize> = state.members.iter().copied().filter(|&i| !kept[i]).collect();
    if removable.len() < need {
        return Err(Error::invalid(format!("only {} removable sticky members, {need} required", removable.len())));
    }
    for i in pick(rng, &removable, need) {
        state.is_member[i] = false;
    }
    for &i in used_fresh {
        state.is_member[i] = true;
    }
    state.members = (0..p.n).filter(|&i| state.is_member[i]).collect();
    Ok(())
}
