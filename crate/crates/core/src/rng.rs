//! Counter-based random streams.
//!
//! Every random draw in a simulation is addressed by `(seed, stream, point,
//! trial)`: the first three select a ChaCha key, the trial index selects
//! the ChaCha stream. A trial therefore sees the same numbers no matter
//! which worker evaluates it or in what order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Channel = 1,
    Noise = 2,
    Lattice = 3,
    Carve = 4,
    Spreading = 5,
    Test = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Key material for one `(seed, stream, point)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey([u8; 32]);

impl StreamKey {
    pub fn new(seed: u64, stream: Stream, point: u64) -> Self {
        let mut state = splitmix64(seed ^ splitmix64(stream as u64) ^ splitmix64(point).rotate_left(17));
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self(key)
    }

    /// Generator for trial `index` under this key.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.0);
        rng.set_stream(index);
        rng
    }
}

/// Shorthand for `StreamKey::new(seed, stream, point).rng(index)`.
pub fn stream_rng(seed: u64, stream: Stream, point: u64, index: u64) -> ChaCha8Rng {
    StreamKey::new(seed, stream, point).rng(index)
}
