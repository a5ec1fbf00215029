use serde::{Deserialize, Serialize};

use super::ClientProfile;
use crate::error::{Error, Result};
use crate::sampling::GroupTag;

/// One client drawn this round.
#[derive(Debug, Clone, PartialEq)]
pub struct Participant {
    pub client: usize,
    pub group: GroupTag,
    pub download_bytes: usize,
    pub upload_bytes: usize,
    /// Multiplier on local compute time (1 without jitter).
    pub compute_scale: f64,
    /// Offline clients never finish.
    pub offline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTiming {
    /// `(client, finish seconds)` for every online participant.
    pub finish: Vec<(usize, f64)>,
    pub used_sticky: Vec<usize>,
    /// Fresh clients, or every used client under uniform sampling.
    pub used_fresh: Vec<usize>,
    pub wall_time: f64,
    /// Longest download among used clients.
    pub slowest_used_download_s: f64,
}

impl RoundTiming {
    pub fn used(&self) -> impl Iterator<Item = usize> + '_ {
        self.used_sticky.iter().chain(&self.used_fresh).copied()
    }
}

fn download_s(p: &Participant, prof: &ClientProfile) -> f64 {
    p.download_bytes as f64 * 8.0 / prof.down_bw
}

/// Keeps the `need_sticky` earliest sticky finishers and the `need_fresh`
/// earliest of the rest; ties go to the lower client id.
pub fn simulate_round_timing(
    round: usize,
    participants: &[Participant],
    profiles: &[ClientProfile],
    local_steps: usize,
    need_sticky: usize,
    need_fresh: usize,
) -> Result<RoundTiming> {
    let mut sticky: Vec<(f64, usize)> = Vec::new();
    let mut fresh: Vec<(f64, usize)> = Vec::new();
    let mut finish = Vec::new();
    let mut download = std::collections::BTreeMap::new();
    for p in participants.iter().filter(|p| !p.offline) {
        let prof =
            profiles.get(p.client).ok_or_else(|| Error::invalid(format!("no profile for client {}", p.client)))?;
        let down = download_s(p, prof);
        let t =
            down + local_steps as f64 * p.compute_scale / prof.compute_rate + p.upload_bytes as f64 * 8.0 / prof.up_bw;
        finish.push((p.client, t));
        download.insert(p.client, down);
        match p.group {
            GroupTag::Sticky => sticky.push((t, p.client)),
            GroupTag::Fresh | GroupTag::Uniform => fresh.push((t, p.client)),
        }
    }
    let take = |mut pool: Vec<(f64, usize)>, need: usize, group: &'static str| -> Result<Vec<(f64, usize)>> {
        if pool.len() < need {
            return Err(Error::Dropout { round, group, needed: need, available: pool.len() });
        }
        pool.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        pool.truncate(need);
        Ok(pool)
    };
    let used_s = take(sticky, need_sticky, "sticky")?;
    let used_f = take(fresh, need_fresh, "fresh")?;
    let wall_time = used_s.iter().chain(&used_f).map(|u| u.0).fold(0.0, f64::max);
    let slowest_used_download_s = used_s.iter().chain(&used_f).map(|u| download[&u.1]).fold(0.0, f64::max);
    let ids = |v: Vec<(f64, usize)>| {
        let mut ids: Vec<usize> = v.into_iter().map(|u| u.1).collect();
        ids.sort_unstable();
        ids
    };
    Ok(RoundTiming { finish, used_sticky: ids(used_s), used_fresh: ids(used_f), wall_time, slowest_used_download_s })
}
