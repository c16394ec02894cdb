//! Deterministic seed derivation and the crate-wide random generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::domain::{InputVector, Shape};

/// Generator used everywhere a reproducible stream is needed.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a sequence of integers into one seed. Order matters.
pub fn derive(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED_0FA7_7AC4_u64, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// One standard-normal draw per component, in index order.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> InputVector {
    let data = (0..shape.len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    InputVector::new(data, shape).expect("length matches shape")
}
