//! Seeded random streams.
//!
//! Every stochastic step draws from its own ChaCha stream keyed by the global
//! seed and a stream id, so work split across threads reproduces serial runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream purposes; the tag occupies the top byte of the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    TargetPoses = 1,
    Lidar = 2,
    Camera = 3,
    Features = 4,
    Sweep = 5,
    Ransac = 6,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64, sub: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = ((purpose as u64) << 56) | ((index & 0xFFFF_FFFF) << 16) | (sub & 0xFFFF);
    rng.set_stream(id);
    rng
}
