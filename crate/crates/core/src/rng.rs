//! Splittable, counter-based random streams.
//!
//! A stream is the pair `(seed, stream_id)`. The seed keys a ChaCha8 generator
//! and the stream id selects one of its 2^64 independent counter streams, so
//! there is never any shared mutable generator state between replicates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator type handed out by [`RngStream::rng`].
pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Derives the stream for sub-task `index`: the stream id is hashed with
    /// the index, the seed is kept.
    pub fn child(&self, index: u64) -> Self {
        let mixed = splitmix64(self.stream_id.rotate_left(17) ^ splitmix64(index ^ 0xA5A5_5A5A_0F0F_F0F0));
        Self {
            seed: self.seed,
            stream_id: mixed,
        }
    }

    /// Two-level derivation, `child(a).child(b)`.
    pub fn grandchild(&self, a: u64, b: u64) -> Self {
        self.child(a).child(b)
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}
