//! Seeded random substreams.
//!
//! Every random draw in the crate comes from a [`Substream`] derived from a
//! master seed and a key path (for example `[cell_hash, class, sample]`).
//! Streams for different keys are independent of each other and of the order
//! in which they are created, which is what makes batch generation and grid
//! sweeps reproducible under any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a key path into a 64-bit seed.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &k in keys {
        h = splitmix64(h ^ splitmix64(k.wrapping_add(GOLDEN)));
    }
    h
}

/// Stable 64-bit FNV-1a hash, used to turn labels into stream keys.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone)]
pub struct Substream {
    rng: ChaCha12Rng,
}

impl Substream {
    pub fn new(master: u64, keys: &[u64]) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(derive_seed(master, keys)),
        }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.normal();
        }
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        self.fill_normal(&mut v);
        v
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
