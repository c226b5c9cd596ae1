//! Per-record random streams.
//!
//! Algorithm: ChaCha8 keyed by SplitMix64 expansions of `(seed, domain)`,
//! with the ChaCha stream id set to the record index. Every record owns an
//! independent stream, so results do not depend on thread count or on how
//! records are sharded.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream domains; distinct domains never share keys.
pub const POPULATION_DOMAIN: u64 = 0;
pub const PUBLICATION_DOMAIN: u64 = 1;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of an independent replicate of a run seeded with `seed`.
pub fn replicate_seed(seed: u64, replicate: u64) -> u64 {
    let mut state = seed ^ replicate.wrapping_mul(0xA076_1D64_78BD_642F);
    splitmix64(&mut state)
}

#[derive(Debug, Clone)]
pub struct StreamFactory {
    base: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(seed: u64, domain: u64) -> Self {
        let mut state = seed ^ domain.wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        StreamFactory { base: ChaCha8Rng::from_seed(key) }
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        rng
    }
}
