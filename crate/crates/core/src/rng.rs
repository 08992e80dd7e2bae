//! Seed handling. All randomness in the crate flows from a [`Seed`].
//!
//! Splitting rule: the 64-bit master seed is expanded with SplitMix64 into a
//! 256-bit ChaCha12 key; the 64-bit stream number selects the ChaCha stream.
//! Trial `i` of an experiment uses stream `i`. Independent draws inside one
//! trial use [`Seed::derive`], which re-keys from `(master, label)` and keeps
//! the stream.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Identifier recorded in every run manifest.
pub const RNG_ALGORITHM: &str = "chacha12/splitmix64-key/stream-per-trial (rand_chacha 0.9)";

pub type Rng = ChaCha12Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Seed { master, stream: 0 }
    }

    /// Seed of trial `i`.
    pub fn trial(self, i: u64) -> Self {
        Seed {
            master: self.master,
            stream: i,
        }
    }

    /// An independent seed for a labelled sub-draw.
    pub fn derive(self, label: u64) -> Self {
        let mut s = self.master ^ label.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        Seed {
            master: splitmix64(&mut s),
            stream: self.stream,
        }
    }

    pub fn rng(self) -> Rng {
        let mut state = self.master;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(self.stream);
        rng
    }
}
