//! Direct implementations of the built-in programs' arithmetic.

use autoda_core::seed::{rng_from, standard_normal};
use autoda_core::{InputVector, Shape};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn native_final(x0: &[f64], x1: &[f64], noise: &[f64], s: f64) -> Vec<f64> {
    let d: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| a - b).collect();
    let d_norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n_norm = noise.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm = d_norm.max(n_norm);
    (0..x0.len())
        .map(|i| x1[i] + s * (d[i] + d[i] / norm) + s * (noise[i] + s * (noise[i] / norm)))
        .collect()
}

/// Draws `n0`, then `n1`, then the branch index from `rng`.
pub fn native_initial<R: Rng>(
    x0: &[f64],
    x1: &[f64],
    noise: &[f64],
    s: f64,
    rng: &mut R,
) -> Vec<f64> {
    let n0: f64 = rng.sample(StandardNormal);
    let x: Vec<f64> = (0..x0.len())
        .map(|i| s * x0[i] + (1.0 - s) * x1[i] + n0 * noise[i])
        .collect();
    let n1 = 0.5 + rng.gen::<f64>();
    let branch = ((rng.gen::<f64>() * 3.0) as usize).min(2);
    (0..x.len())
        .map(|i| match branch {
            0 => x[i] + n1 * noise[i],
            1 => x[i] - n1 * noise[i],
            _ => x[i] * (n1 * noise[i]),
        })
        .collect()
}

/// Random originals and current points in the unit box, Gaussian noise and
/// a step in `[1e-4, 1.5)`.
pub fn context(dim: usize, seed: u64) -> (InputVector, InputVector, InputVector, f64) {
    let mut rng = rng_from(seed);
    let x0 = InputVector::flat((0..dim).map(|_| rng.gen::<f64>()).collect());
    let x1 = InputVector::flat((0..dim).map(|_| rng.gen::<f64>()).collect());
    let noise = standard_normal(&mut rng, Shape::Flat(dim));
    let s = rng.gen_range(1e-4..1.5);
    (x0, x1, noise, s)
}

pub fn assert_close(got: &[f64], want: &[f64], what: &str) {
    assert_eq!(got.len(), want.len());
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        assert!((g - w).abs() <= 1e-12, "{what}: component {i}: {g} vs {w}");
    }
}
