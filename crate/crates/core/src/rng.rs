//! Named, seed-derived RNG substreams.
//!
//! A single master seed fans out into independent ChaCha8 streams keyed by
//! a stream name and up to two integer coordinates (e.g. client id and
//! round), so that adding draws to one stream never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream identifiers. The numeric tags are part of the reproducibility
/// contract; do not renumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Sampling = 1,
    Data = 2,
    Init = 3,
    Training = 4,
    Profiles = 5,
    Availability = 6,
    Jitter = 7,
    Partition = 8,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a 64-bit sub-seed from the master seed and stream coordinates.
pub fn derive_seed(master: u64, stream: Stream, a: u64, b: u64) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ (stream as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    h = splitmix64(h ^ a.wrapping_mul(0xA076_1D64_78BD_642F));
    splitmix64(h ^ b.wrapping_mul(0xE703_7ED1_A0B4_28DB))
}

pub fn stream(master: u64, stream: Stream) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, stream, 0, 0))
}

/// Per-client, per-round substream.
pub fn substream(master: u64, stream: Stream, a: u64, b: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, stream, a, b))
}
