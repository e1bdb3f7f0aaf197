//! Seed derivation. One master seed fans out into independent per-use
//! streams, each identified by a fixed label, so adding a new consumer never
//! perturbs the draws of an existing one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for every random draw in the crate.
pub type Rng = ChaCha8Rng;

/// Mixes `master` with a label into a 64-bit subseed (FNV-1a over the label,
/// finished with the SplitMix64 mixer).
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ splitmix64(h))
}

/// Generator for the stream `label` under `master`.
pub fn rng_for(master: u64, label: &str) -> Rng {
    Rng::seed_from_u64(derive_seed(master, label))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
