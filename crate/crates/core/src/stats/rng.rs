//! Counter-based sampling: sample `i` under seed `s` is a pure function of
//! `(s, i)`, so any partition of the index range gives the same draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sequence::SignVector;

/// Generator for sample `index` under `seed`: the ChaCha8 key comes from the
/// seed and the stream number is the index.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A uniform sign vector of length `n` for sample `index`.
pub fn sign_vector(seed: u64, index: u64, n: usize) -> SignVector {
    let mut rng = sample_rng(seed, index);
    let words = (0..n.div_ceil(64)).map(|_| rng.next_u64()).collect();
    SignVector::from_words(words, n)
}

/// SplitMix64 finalizer, used to derive independent sub-seeds.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
