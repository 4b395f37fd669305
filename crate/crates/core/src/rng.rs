//! Seed derivation. Every random quantity in the crate is drawn from a
//! ChaCha stream keyed by a master seed and a stream index, so results do
//! not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent stream `index` of generator `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes a list of labels into a child seed (splitmix64 finalizer chain).
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    let mut h = splitmix(seed ^ 0x5357_494e_4645_5221);
    for &label in labels {
        h = splitmix(h ^ splitmix(label.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

/// Stable 64-bit label for a string (FNV-1a).
pub fn label(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
