//! Seed derivation and seeded random directions.
//!
//! Every stochastic operation in the crate takes an explicit `u64` seed and
//! builds a `ChaCha8Rng` from it. Independent sub-streams (per-trial seeds,
//! separate beta/data streams) are derived with [`mix_seed`], a splitmix64
//! finalizer, so results never depend on evaluation order or thread count.

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Derive a child seed from `(master, stream)`.
///
/// Pure 64-bit mixing (splitmix64 finalizer over `master` xor an odd
/// multiple of `stream`), so distinct streams give statistically
/// independent generators.
pub fn mix_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The crate-wide RNG built from a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draw a vector of i.i.d. standard normals.
pub fn standard_normal_vec(rng: &mut ChaCha8Rng, len: usize) -> Array1<f64> {
    Array1::from_iter((0..len).map(|_| StandardNormal.sample(rng)))
}

/// Draw a unit vector uniform on the sphere (normalized Gaussian draw).
///
/// Redraws in the measure-zero event of an underflowing norm.
pub fn unit_vector(rng: &mut ChaCha8Rng, len: usize) -> Array1<f64> {
    loop {
        let v = standard_normal_vec(rng, len);
        let norm = v.dot(&v).sqrt();
        if norm > 1e-150 {
            return v / norm;
        }
    }
}
