//! Deterministic random streams keyed by `(seed, frame, track, index, purpose)`.
//!
//! Each key selects an independent ChaCha8 stream, so draws do not depend on
//! the order in which targets are processed or on how work is split across
//! threads.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; distinct purposes never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Sampling = 1,
    Swarm = 2,
    Resample = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyedRng {
    seed: u64,
}

impl KeyedRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, frame: u64, track: u64, index: u64, purpose: Purpose) -> Stream {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&frame.to_le_bytes());
        key[16..24].copy_from_slice(&track.to_le_bytes());
        let tail = (index << 8) | purpose as u64;
        key[24..].copy_from_slice(&tail.to_le_bytes());
        Stream(ChaCha8Rng::from_seed(key))
    }
}

/// One keyed stream.
pub struct Stream(ChaCha8Rng);

impl Stream {
    /// Uniform draw in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    /// Uniform draw in `[-bound, bound)`; zero when `bound` is zero.
    pub fn symmetric(&mut self, bound: f64) -> f64 {
        if bound == 0.0 {
            return 0.0;
        }
        (2.0 * self.unit() - 1.0) * bound
    }
}
