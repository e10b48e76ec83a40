//! Derivation of independent, reproducible random streams.
//!
//! Every random decision in the pipeline draws from an RNG that is a pure
//! function of `(global seed, sentence id, purpose)`, so the number of
//! worker threads and the completion order of work items never influence
//! the output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The purpose a random stream is used for. Each gets a distinct key so
/// that adding draws to one stage never shifts another stage's choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Sample,
    Relations,
    Infilling,
    Distractors,
    Mixing,
}

impl Stream {
    fn key(self) -> u64 {
        match self {
            Stream::Sample => 0x5341_4d50_4c45_0001,
            Stream::Relations => 0x5245_4c41_5449_0002,
            Stream::Infilling => 0x494e_4649_4c4c_0003,
            Stream::Distractors => 0x4449_5354_5241_0004,
            Stream::Mixing => 0x4d49_5849_4e47_0005,
        }
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix the three components into one 64-bit seed.
pub fn derive_seed(seed: u64, item: u64, stream: Stream) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ item) ^ stream.key())
}

/// RNG for one item (usually a sentence) and one purpose.
pub fn item_rng(seed: u64, item: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, item, stream))
}

/// RNG for a whole-run decision that is not tied to a single item.
pub fn run_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    item_rng(seed, u64::MAX, stream)
}
