//! Reproducible substreams for parallel ensembles.
//!
//! Every stochastic routine draws from a stream keyed by
//! `(seed, run, particle, domain)`, so results are bit-identical no matter
//! how runs are scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Independent counter-keyed stream.
pub fn substream(seed: u64, run: u64, particle: u64, domain: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let words = [
        splitmix(seed ^ 0xa076_1d64_78bd_642f),
        splitmix(run ^ 0xe703_7ed1_a0b4_28db),
        splitmix(particle ^ 0x8ebc_6af0_9c88_c6e3),
        splitmix(domain ^ 0x5899_65cc_7537_4cc3),
    ];
    for (i, w) in words.iter().enumerate() {
        key[i * 8..(i + 1) * 8].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
