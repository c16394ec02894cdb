//! Success-rate feedback for the step scalar `s`.
//!
//! `p` is an exponential moving average of the improvement indicator. The
//! step multiplier `f(p)^0.1` is below one while `p < 0.25` and above one
//! once `p > 0.25`, which holds the acceptance rate near a quarter.

use super::EngineError;

/// Acceptance rate the controller settles on.
pub const TARGET_RATE: f64 = 0.25;

const EMA_DECAY: f64 = 0.95;
const STEP_EXPONENT: f64 = 0.1;

/// Piecewise-linear rate response: `0.5 + 2p` up to the knee at 0.25,
/// `5/6 + 2p/3` above it. Ranges over `[0.5, 1.5]`.
pub fn f_of_p(p: f64) -> Result<f64, EngineError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EngineError::Domain(format!("p = {p} is outside [0, 1]")));
    }
    Ok(response(p))
}

fn response(p: f64) -> f64 {
    if p <= TARGET_RATE {
        0.5 + 2.0 * p
    } else {
        5.0 / 6.0 + 2.0 * p / 3.0
    }
}

pub fn update_p(p: f64, improved: bool) -> f64 {
    let k = if improved { 1.0 } else { 0.0 };
    EMA_DECAY * p + (1.0 - EMA_DECAY) * k
}

pub fn update_s(s: f64, p: f64) -> f64 {
    s * response(p.clamp(0.0, 1.0)).powf(STEP_EXPONENT)
}

/// The `(p, s)` state carried through an attack run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepController {
    p: f64,
    s: f64,
}

impl StepController {
    /// Starts at the target rate so the first rejections and acceptances
    /// move `s` symmetrically.
    pub fn new(initial_s: f64) -> Self {
        Self::with_state(TARGET_RATE, initial_s)
    }

    pub fn with_state(p: f64, s: f64) -> Self {
        Self { p, s }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Folds one iteration's outcome in: `p` first, then `s` from the new `p`.
    pub fn update(&mut self, improved: bool) {
        self.p = update_p(self.p, improved);
        self.s = update_s(self.s, self.p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_at_the_ends_and_knee() {
        assert_eq!(f_of_p(0.0).unwrap(), 0.5);
        assert_eq!(f_of_p(0.25).unwrap(), 1.0);
        assert_eq!(f_of_p(1.0).unwrap(), 1.5);
        assert!(f_of_p(-0.01).is_err());
        assert!(f_of_p(1.01).is_err());
    }

    #[test]
    fn response_is_continuous_at_the_knee() {
        let above = f_of_p(0.25 + 1e-12).unwrap();
        assert!((above - 1.0).abs() < 1e-11);
    }

    #[test]
    fn ema_examples() {
        assert!((update_p(0.25, true) - 0.2875).abs() < 1e-16);
        assert!((update_p(0.25, false) - 0.2375).abs() < 1e-16);
        assert_eq!(update_p(1.0, true), 1.0);
    }

    #[test]
    fn step_examples() {
        assert_eq!(update_s(0.001, 0.25), 0.001);
        assert!((update_s(0.001, 0.0) - 0.000_933_032_991_536_807_4).abs() < 1e-15);
        assert!((update_s(0.001, 1.0) - 0.001_041_379_743_992_410_6).abs() < 1e-15);
    }

    #[test]
    fn direction_of_the_step_multiplier() {
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let m = f_of_p(p).unwrap().powf(0.1);
            if p < 0.25 {
                assert!(m < 1.0, "p = {p}");
            } else if p > 0.25 {
                assert!(m > 1.0, "p = {p}");
            } else {
                assert_eq!(m, 1.0);
            }
        }
    }

    #[test]
    fn controller_keeps_invariants() {
        let mut c = StepController::new(0.001);
        for i in 0..1000 {
            c.update(i % 3 == 0);
            assert!((0.0..=1.0).contains(&c.p()));
            assert!(c.s() > 0.0);
        }
    }
}
