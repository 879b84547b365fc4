//! Seeded random streams. Every source of randomness in a mission draws
//! from its own ChaCha stream, keyed by (seed, purpose, tag), so changing the
//! planner or the number of trials never perturbs another stream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    TagPlacement,
    TargetMotion(usize),
    Measurement(usize),
    Filter(usize),
    Bench,
}

impl Stream {
    fn id(self) -> u64 {
        let (purpose, index) = match self {
            Stream::TagPlacement => (1u64, 0usize),
            Stream::TargetMotion(i) => (2, i),
            Stream::Measurement(i) => (3, i),
            Stream::Filter(i) => (4, i),
            Stream::Bench => (5, 0),
        };
        (purpose << 32) | index as u64
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Seed of Monte-Carlo trial `trial` under master seed `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng.set_word_pos(2 * trial as u128);
    rng.next_u64()
}
