//! Seed streams and the small set of samplers the estimators need.
//!
//! Every stochastic operation draws from its own ChaCha stream derived from
//! `(master seed, purpose, index)`, so results do not depend on how work is
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Stream purposes. Distinct constants keep streams for different jobs apart.
pub mod purpose {
    pub const INTERVALS: u64 = 0x1;
    pub const SIMULATION: u64 = 0x2;
    pub const WAIC_DRAWS: u64 = 0x3;
    pub const POSTERIOR: u64 = 0x4;
}

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, purpose: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ purpose) ^ index)
}

pub fn stream(master: u64, purpose: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, purpose, index))
}

/// Fill `out` with a draw from the flat Dirichlet distribution on the simplex.
///
/// Uses normalized standard exponentials.
pub fn flat_dirichlet<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut total = 0.0;
    for x in out.iter_mut() {
        let e: f64 = Exp1.sample(rng);
        *x = e;
        total += e;
    }
    for x in out.iter_mut() {
        *x /= total;
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn standard_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Uniform draw on `[0, 1)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}
