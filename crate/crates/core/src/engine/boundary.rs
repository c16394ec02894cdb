//! Boundary Attack proposal: an orthogonal step on the sphere around the
//! original followed by a contraction toward it.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;

use super::proposal::{NumericError, Proposal};
use crate::domain::InputVector;
use crate::seed::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryParams {
    /// Orthogonal step length relative to the current distance.
    pub spherical_step: f64,
    /// Contraction toward the original relative to the current distance.
    pub source_step: f64,
    /// Factor applied to both steps when the success rate leaves the band.
    pub step_adaptation: f64,
    /// Outcomes kept for the success-rate estimate.
    pub window: usize,
    /// Iterations between adaptation checks.
    pub check_every: usize,
    pub high_rate: f64,
    pub low_rate: f64,
}

impl Default for BoundaryParams {
    fn default() -> Self {
        Self {
            spherical_step: 0.01,
            source_step: 0.01,
            step_adaptation: 1.5,
            window: 30,
            check_every: 10,
            high_rate: 0.5,
            low_rate: 0.2,
        }
    }
}

/// Stateful Boundary Attack proposal. Ignores the controller's `s` and
/// adapts its own steps from the acceptance history.
#[derive(Debug, Clone)]
pub struct BoundaryProposal {
    params: BoundaryParams,
    spherical_step: f64,
    source_step: f64,
    history: VecDeque<bool>,
    steps: usize,
}

pub fn boundary_attack_proposal() -> BoundaryProposal {
    BoundaryProposal::new(BoundaryParams::default())
}

impl BoundaryProposal {
    pub fn new(params: BoundaryParams) -> Self {
        Self {
            spherical_step: params.spherical_step,
            source_step: params.source_step,
            history: VecDeque::with_capacity(params.window),
            steps: 0,
            params,
        }
    }

    pub fn spherical_step(&self) -> f64 {
        self.spherical_step
    }

    pub fn source_step(&self) -> f64 {
        self.source_step
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Proposal for BoundaryProposal {
    fn propose(
        &mut self,
        current: &InputVector,
        original: &InputVector,
        rng: &mut SeededRng,
        _s: f64,
    ) -> Result<InputVector, NumericError> {
        let x = current.data();
        let x0 = original.data();
        let to_source: Vec<f64> = x0.iter().zip(x).map(|(a, b)| a - b).collect();
        let source_norm = norm(&to_source);
        if source_norm == 0.0 {
            return Ok(current.clone());
        }

        // orthogonal perturbation, then back onto the sphere of radius source_norm
        let spherical: Vec<f64> = if self.spherical_step == 0.0 {
            x.to_vec()
        } else {
            let dir: Vec<f64> = to_source.iter().map(|v| v / source_norm).collect();
            let mut eta: Vec<f64> = (0..x.len()).map(|_| rng.sample(StandardNormal)).collect();
            let along: f64 = eta.iter().zip(&dir).map(|(e, d)| e * d).sum();
            eta.iter_mut().zip(&dir).for_each(|(e, d)| *e -= along * d);
            let eta_norm = norm(&eta);
            if eta_norm > 0.0 {
                let scale = self.spherical_step * source_norm / eta_norm;
                eta.iter_mut().for_each(|e| *e *= scale);
            }
            let shrink = 1.0 / (self.spherical_step * self.spherical_step + 1.0).sqrt();
            x0.iter()
                .zip(x)
                .zip(&eta)
                .map(|((o, c), e)| o + (c + e - o) * shrink)
                .collect()
        };

        // contraction: the result sits at (1 - source_step) * source_norm
        let new_dir: Vec<f64> = x0.iter().zip(&spherical).map(|(o, p)| o - p).collect();
        let new_norm = norm(&new_dir);
        if new_norm == 0.0 {
            return Ok(InputVector::new(spherical, original.shape()).expect("same length"));
        }
        let deviation = new_norm - source_norm;
        let length = (self.source_step * source_norm + deviation).max(0.0) / new_norm;
        let candidate: Vec<f64> = spherical
            .iter()
            .zip(&new_dir)
            .map(|(p, d)| p + length * d)
            .collect();
        if candidate.iter().any(|v| !v.is_finite()) {
            return Err(NumericError("non-finite boundary proposal".into()));
        }
        Ok(InputVector::new(candidate, original.shape()).expect("same length"))
    }

    fn observe(&mut self, improved: bool) {
        if self.history.len() == self.params.window {
            self.history.pop_front();
        }
        self.history.push_back(improved);
        self.steps += 1;
        if self.history.len() < self.params.window
            || !self.steps.is_multiple_of(self.params.check_every)
        {
            return;
        }
        let rate = self.history.iter().filter(|&&b| b).count() as f64 / self.history.len() as f64;
        let factor = if rate > self.params.high_rate {
            self.params.step_adaptation
        } else if rate < self.params.low_rate {
            1.0 / self.params.step_adaptation
        } else {
            return;
        };
        self.spherical_step *= factor;
        self.source_step *= factor;
        self.history.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::l2_distance;
    use crate::seed::rng_from;

    fn points() -> (InputVector, InputVector) {
        (
            InputVector::flat(vec![0.5, 0.4, 0.6, 0.5]),
            InputVector::flat(vec![0.9, 0.1, 0.2, 0.7]),
        )
    }

    #[test]
    fn zero_steps_return_the_current_point() {
        let (x0, x) = points();
        let mut prop = BoundaryProposal::new(BoundaryParams {
            spherical_step: 0.0,
            source_step: 0.0,
            ..Default::default()
        });
        let out = prop.propose(&x, &x0, &mut rng_from(3), 1.0).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn source_step_contracts_the_distance() {
        let (x0, x) = points();
        let before = l2_distance(&x, &x0).unwrap();
        for (sph, src) in [(0.0, 0.1), (0.01, 0.01), (0.3, 0.05)] {
            let mut prop = BoundaryProposal::new(BoundaryParams {
                spherical_step: sph,
                source_step: src,
                ..Default::default()
            });
            let mut rng = rng_from(11);
            for _ in 0..20 {
                let out = prop.propose(&x, &x0, &mut rng, 1.0).unwrap();
                let after = l2_distance(&out, &x0).unwrap();
                assert!((after - (1.0 - src) * before).abs() < 1e-12, "{sph} {src}");
            }
        }
    }

    #[test]
    fn spherical_step_moves_orthogonally() {
        let (x0, x) = points();
        let mut prop = BoundaryProposal::new(BoundaryParams {
            spherical_step: 0.2,
            source_step: 0.0,
            ..Default::default()
        });
        let out = prop.propose(&x, &x0, &mut rng_from(5), 1.0).unwrap();
        assert!(l2_distance(&out, &x).unwrap() > 0.0);
        let (d0, d1) = (
            l2_distance(&x, &x0).unwrap(),
            l2_distance(&out, &x0).unwrap(),
        );
        assert!((d0 - d1).abs() < 1e-12);
    }

    #[test]
    fn steps_adapt_to_the_success_rate() {
        let mut prop = boundary_attack_proposal();
        for _ in 0..30 {
            prop.observe(true);
        }
        assert!((prop.source_step() - 0.015).abs() < 1e-15);
        assert!((prop.spherical_step() - 0.015).abs() < 1e-15);
        for _ in 0..30 {
            prop.observe(false);
        }
        assert!((prop.source_step() - 0.01).abs() < 1e-15);
        for _ in 0..30 {
            prop.observe(prop.steps.is_multiple_of(3));
        }
        assert!((prop.source_step() - 0.01).abs() < 1e-15);
    }
}
