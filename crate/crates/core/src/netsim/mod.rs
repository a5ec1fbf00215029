//! Client bandwidth/compute profiles, staleness-aware download sizing,
//! over-commitment planning and per-round straggler timing.

mod overcommit;
mod profiles;
mod timing;
mod versions;

pub use overcommit::{plan_overcommit, OvercommitPlan};
pub use profiles::{sample_profiles, ClientProfile, NetworkConfig, RateDistribution};
pub use timing::{simulate_round_timing, Participant, RoundTiming};
pub use versions::{downstream_payload, ServerVersionVector};
