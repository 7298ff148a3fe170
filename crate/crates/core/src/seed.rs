//! Stable seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a 64-bit value
//! obtained by mixing a parent seed with a string label and integer indices.
//! The mix is SplitMix64's finalizer applied over an FNV-1a hash of the label,
//! so derived seeds are identical across platforms, releases and thread counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Mixes `parent` with a label and a list of indices into a child seed.
pub fn derive(parent: u64, label: &str, indices: &[u64]) -> u64 {
    let mut h = splitmix(parent ^ fnv1a(label));
    for &i in indices {
        h = splitmix(h ^ splitmix(i));
    }
    h
}

/// Per-trial seed: a stable function of `(master_seed, m, trial)`.
pub fn trial_seed(master: u64, m: usize, trial: usize) -> u64 {
    derive(master, "trial", &[m as u64, trial as u64])
}

pub fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_rng(parent: u64, label: &str, indices: &[u64]) -> SimRng {
    rng(derive(parent, label, indices))
}
