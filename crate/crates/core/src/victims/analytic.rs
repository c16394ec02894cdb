use serde::{Deserialize, Serialize};

use super::VictimError;
use crate::domain::{DecisionOracle, InputVector, Label, Shape};

/// Label 1 on the side `w·x >= b`, label 0 elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneOracle {
    w: Vec<f64>,
    b: f64,
}

impl HyperplaneOracle {
    pub fn new(w: Vec<f64>, b: f64) -> Result<Self, VictimError> {
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) || !b.is_finite() {
            return Err(VictimError::Invalid(
                "hyperplane normal must be non-zero".into(),
            ));
        }
        Ok(Self { w, b })
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn margin(&self, x: &InputVector) -> f64 {
        self.w.iter().zip(x.data()).map(|(w, v)| w * v).sum::<f64>() - self.b
    }

    /// Distance from `x0` to the decision boundary.
    pub fn boundary_distance(&self, x0: &InputVector) -> f64 {
        let norm = self.w.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.margin(x0).abs() / norm
    }
}

impl DecisionOracle for HyperplaneOracle {
    fn label_of(&self, x: &InputVector) -> Label {
        Label(usize::from(self.margin(x) >= 0.0))
    }

    fn class_count(&self) -> usize {
        2
    }

    fn input_shape(&self) -> Shape {
        Shape::Flat(self.w.len())
    }
}

/// Label 1 outside the ball `|x - c| < r`, label 0 inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereOracle {
    center: Vec<f64>,
    radius: f64,
}

impl SphereOracle {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self, VictimError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(VictimError::Invalid(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn distance_to_center(&self, x: &InputVector) -> f64 {
        crate::domain::squared_l2(x.data(), &self.center).sqrt()
    }

    /// Distance from `x0` to the sphere, from either side.
    pub fn boundary_distance(&self, x0: &InputVector) -> f64 {
        (self.radius - self.distance_to_center(x0)).abs()
    }
}

impl DecisionOracle for SphereOracle {
    fn label_of(&self, x: &InputVector) -> Label {
        Label(usize::from(self.distance_to_center(x) >= self.radius))
    }

    fn class_count(&self) -> usize {
        2
    }

    fn input_shape(&self) -> Shape {
        Shape::Flat(self.center.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperplane_distance() {
        let h = HyperplaneOracle::new(vec![1.0, 0.0], 0.5).unwrap();
        let x0 = InputVector::flat(vec![0.2, 0.7]);
        assert!((h.boundary_distance(&x0) - 0.3).abs() < 1e-15);
        assert!(HyperplaneOracle::new(vec![0.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn sphere_distance() {
        let s = SphereOracle::new(vec![0.0; 3], 0.4).unwrap();
        assert_eq!(s.boundary_distance(&InputVector::flat(vec![0.0; 3])), 0.4);
        let x0 = InputVector::flat(vec![0.1, 0.0, 0.0]);
        assert!((s.boundary_distance(&x0) - 0.3).abs() < 1e-15);
        assert!(SphereOracle::new(vec![0.0], 0.0).is_err());
    }

    #[test]
    fn labels_flip_when_crossing_the_boundary() {
        let h = HyperplaneOracle::new(vec![3.0, 4.0], 2.5).unwrap();
        let s = SphereOracle::new(vec![0.5, 0.5], 0.25).unwrap();
        // rays crossing each boundary at t = 0; w·x - b = 5t on the first,
        // |x - c| = 0.25 + 0.2t on the second
        for i in (-50..=50).filter(|&i| i != 0) {
            let t = i as f64 / 100.0;
            let on_h = InputVector::flat(vec![0.3 + 0.6 * t, 0.4 + 0.8 * t]);
            assert_eq!(h.label_of(&on_h), Label(usize::from(t > 0.0)), "t = {t}");
            let r = 0.25 + 0.2 * t;
            let on_s = InputVector::flat(vec![0.5 + 0.6 * r, 0.5 - 0.8 * r]);
            assert_eq!(s.label_of(&on_s), Label(usize::from(t > 0.0)), "t = {t}");
        }
    }
}
