// SPDX-License-Identifier: Apache-2.0

//! Reproducible random streams.
//!
//! Every Monte Carlo trial, track and protocol step draws from a ChaCha8
//! stream addressed by `(seed, stream)`. ChaCha is counter based, so streams
//! are independent and a trial's draws do not depend on how many other
//! trials ran before it or on which thread.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Root of a family of independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub const fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub const fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for stream `index` of this family.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Child family, e.g. one per track inside a trial.
    pub fn child(&self, index: u64) -> Streams {
        Streams {
            seed: splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
