//! Seedable, splittable pseudo-random generator.
//!
//! Every stochastic step in the pipeline draws from a [`Rng`] derived from a
//! base seed plus a tag path (for example `(seed, epoch, sample)`), so results
//! do not depend on scheduling or iteration order.

use rand::seq::SliceRandom;
use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// First tag of every derived stream, one per consumer, so that two
/// consumers sharing a base seed never draw from the same stream.
pub mod domain {
    pub const SPLIT: u64 = 0x5350_4c54; // "SPLT"
    pub const INIT: u64 = 0x494e_4954; // "INIT"
    pub const HEAD: u64 = 0x4845_4144; // "HEAD"
    pub const TRAIN: u64 = 0x5452_4e20; // "TRN "
    pub const LABELS: u64 = 0x4c41_4253; // "LABS"
    pub const IMAGES: u64 = 0x494d_4753; // "IMGS"
}

/// ChaCha8 stream keyed by a mixed 64-bit seed.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with a path of tags into one 64-bit key.
pub fn mix_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Stable 64-bit FNV-1a hash, used to key per-sample streams by id.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for `(seed, tags...)`.
    pub fn derive(seed: u64, tags: &[u64]) -> Self {
        Self::new(mix_seed(seed, tags))
    }

    /// Uniform draw on `[lo, hi]`; returns `lo` when the interval is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        lo + (hi - lo) * self.inner.gen::<f64>()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        self.inner.gen::<f64>() < p
    }

    /// Uniform integer in `0..=max`.
    pub fn index_inclusive(&mut self, max: usize) -> usize {
        self.inner.gen_range(0..=max)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        use rand_distr::{Distribution, StandardNormal};
        StandardNormal.sample(&mut self.inner)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}
