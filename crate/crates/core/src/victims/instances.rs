//! Evaluation sets: victim, original example, its label and a starting
//! point, bundled for the attack loop and fitness evaluation.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{HyperplaneOracle, SphereOracle};
use crate::domain::{l2_distance, DecisionOracle, InputVector, Label};
use crate::seed::{derive, rng_from};

#[derive(Clone)]
pub struct EvalInstance {
    pub oracle: Arc<dyn DecisionOracle>,
    pub original: InputVector,
    pub label: Label,
    pub start: InputVector,
    /// Closed-form minimal adversarial distance, when the victim has one.
    pub optimum: Option<f64>,
}

impl std::fmt::Debug for EvalInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvalInstance")
            .field("original", &self.original.shape())
            .field("label", &self.label)
            .field("optimum", &self.optimum)
            .finish()
    }
}

/// Sphere geometry used for analytic evaluation sets. The defaults keep
/// every point the walk visits well inside the unit box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSetup {
    pub center: f64,
    pub radius: f64,
    pub start_radius: f64,
}

impl Default for SphereSetup {
    fn default() -> Self {
        Self {
            center: 0.5,
            radius: 0.3,
            start_radius: 0.45,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperplaneSetup {
    pub origin: f64,
    /// Distance from the original to the boundary.
    pub offset: f64,
    /// Start point: `along` past the original on the normal, `across`
    /// along a random orthogonal direction.
    pub along: f64,
    pub across: f64,
}

impl Default for HyperplaneSetup {
    fn default() -> Self {
        Self {
            origin: 0.5,
            offset: 0.25,
            along: 0.35,
            across: 0.3,
        }
    }
}

fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// `count` instances on one sphere centred in the box. The original is the
/// centre, so the optimum is the radius; starting points lie at
/// `start_radius` in seeded random directions.
pub fn sphere_instances(
    dim: usize,
    count: usize,
    seed: u64,
    setup: SphereSetup,
) -> Vec<EvalInstance> {
    let center = vec![setup.center; dim];
    let oracle: Arc<dyn DecisionOracle> =
        Arc::new(SphereOracle::new(center.clone(), setup.radius).expect("positive radius"));
    let original = InputVector::flat(center.clone());
    let label = oracle.label_of(&original);
    (0..count)
        .map(|i| {
            let mut rng = rng_from(derive(&[seed, 0x594E, i as u64]));
            let u = unit_vector(&mut rng, dim);
            let start = InputVector::flat(
                center
                    .iter()
                    .zip(&u)
                    .map(|(c, d)| c + setup.start_radius * d)
                    .collect(),
            );
            EvalInstance {
                oracle: Arc::clone(&oracle),
                original: original.clone(),
                label,
                start,
                optimum: Some(setup.radius),
            }
        })
        .collect()
}

/// `count` instances, each with its own random hyperplane at distance
/// `offset` from an original in the middle of the box.
pub fn hyperplane_instances(
    dim: usize,
    count: usize,
    seed: u64,
    setup: HyperplaneSetup,
) -> Vec<EvalInstance> {
    assert!(
        dim >= 2,
        "hyperplane instances need at least two dimensions"
    );
    (0..count)
        .map(|i| {
            let mut rng = rng_from(derive(&[seed, 0x499E, i as u64]));
            let w = unit_vector(&mut rng, dim);
            let x0 = vec![setup.origin; dim];
            let b = w.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>() + setup.offset;
            let oracle = HyperplaneOracle::new(w.clone(), b).expect("unit normal");
            // random direction orthogonal to w
            let mut v = unit_vector(&mut rng, dim);
            let along: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(&w).for_each(|(a, b)| *a -= along * b);
            let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let start: Vec<f64> = x0
                .iter()
                .zip(&w)
                .zip(&v)
                .map(|((x, w), v)| x + setup.along * w + setup.across * v / vn)
                .collect();
            let original = InputVector::flat(x0);
            let label = oracle.label_of(&original);
            EvalInstance {
                optimum: Some(oracle.boundary_distance(&original)),
                oracle: Arc::new(oracle),
                original,
                label,
                start: InputVector::flat(start),
            }
        })
        .collect()
}

/// Index of the pool image closest to `original` among those whose label
/// differs from `label`. Ties go to the lowest index.
pub fn select_starting_point(
    pool: &[(InputVector, Label)],
    original: &InputVector,
    label: Label,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, (candidate, cand_label)) in pool.iter().enumerate() {
        if *cand_label == label {
            continue;
        }
        let Ok(d) = l2_distance(candidate, original) else {
            continue;
        };
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}
