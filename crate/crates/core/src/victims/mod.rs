//! Victim classifiers exposed through [`DecisionOracle`].
//!
//! The analytic victims (a hyperplane and a sphere) have closed-form
//! minimal adversarial distances and serve as the ground truth for
//! convergence checks. [`MlpOracle`] loads small dense networks from JSON.

mod analytic;
mod cifar;
mod counting;
mod instances;
mod mlp;

use thiserror::Error;

pub use analytic::{HyperplaneOracle, SphereOracle};
pub use cifar::{load_cifar10_batch, parse_cifar10_batch, IMAGE_SHAPE, RECORD_LEN};
pub use counting::CountingOracle;
pub use instances::{
    hyperplane_instances, select_starting_point, sphere_instances, EvalInstance, HyperplaneSetup,
    SphereSetup,
};
pub use mlp::{Activation, Layer, MlpFile, MlpOracle};

use crate::domain::{DecisionOracle, InputVector, Label, Shape};

#[derive(Debug, Error)]
pub enum VictimError {
    #[error("invalid victim: {0}")]
    Invalid(String),
    #[error("input has {got} components, victim expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("no closed-form optimum for this victim")]
    Unsupported,
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error("record {record} has label {label}, expected 0..=9")]
    LabelOutOfRange { record: usize, label: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Any of the bundled victims.
#[derive(Debug, Clone)]
pub enum Victim {
    Hyperplane(HyperplaneOracle),
    Sphere(SphereOracle),
    Mlp(MlpOracle),
}

impl DecisionOracle for Victim {
    fn label_of(&self, x: &InputVector) -> Label {
        match self {
            Victim::Hyperplane(o) => o.label_of(x),
            Victim::Sphere(o) => o.label_of(x),
            Victim::Mlp(o) => o.label_of(x),
        }
    }

    fn class_count(&self) -> usize {
        match self {
            Victim::Hyperplane(o) => o.class_count(),
            Victim::Sphere(o) => o.class_count(),
            Victim::Mlp(o) => o.class_count(),
        }
    }

    fn input_shape(&self) -> Shape {
        match self {
            Victim::Hyperplane(o) => o.input_shape(),
            Victim::Sphere(o) => o.input_shape(),
            Victim::Mlp(o) => o.input_shape(),
        }
    }
}

/// Smallest l2 perturbation of `x0` that changes the label, ignoring the
/// unit box.
pub fn optimal_adversarial_distance(victim: &Victim, x0: &InputVector) -> Result<f64, VictimError> {
    match victim {
        Victim::Hyperplane(h) => Ok(h.boundary_distance(x0)),
        Victim::Sphere(s) => Ok(s.boundary_distance(x0)),
        Victim::Mlp(_) => Err(VictimError::Unsupported),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_distances() {
        let h = Victim::Hyperplane(HyperplaneOracle::new(vec![1.0, 0.0], 0.5).unwrap());
        let d = optimal_adversarial_distance(&h, &InputVector::flat(vec![0.2, 0.7])).unwrap();
        assert!((d - 0.3).abs() < 1e-15);

        let s = Victim::Sphere(SphereOracle::new(vec![0.0, 0.0], 0.4).unwrap());
        assert_eq!(
            optimal_adversarial_distance(&s, &InputVector::flat(vec![0.0, 0.0])).unwrap(),
            0.4
        );
        let d = optimal_adversarial_distance(&s, &InputVector::flat(vec![0.06, 0.08])).unwrap();
        assert!((d - 0.3).abs() < 1e-15);

        let m = Victim::Mlp(
            MlpOracle::from_json(
                r#"{"layers": [{"weights": [[1, 0]], "bias": [0], "activation": "none"}]}"#,
            )
            .unwrap(),
        );
        assert!(matches!(
            optimal_adversarial_distance(&m, &InputVector::flat(vec![0.0, 0.0])),
            Err(VictimError::Unsupported)
        ));
    }
}
