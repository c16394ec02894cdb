use serde::{Deserialize, Serialize};

use super::controller::StepController;
use super::proposal::Proposal;
use super::EngineError;
use crate::domain::{
    clamp_to_domain, is_adversarial, l2_distance, AttackTrace, DecisionOracle, InputVector, Label,
    QueryBudget, TracePoint,
};
use crate::error::CoreError;
use crate::seed::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub max_queries: u64,
    pub initial_s: f64,
    pub seed: u64,
    /// Clamp every proposal to `[0, 1]` before querying.
    pub clamp: bool,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            max_queries: 10_000,
            initial_s: 0.001,
            seed: 0,
            clamp: true,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_queries == 0 {
            return Err(EngineError::InvalidConfig(
                "max_queries must be at least 1".into(),
            ));
        }
        if !(self.initial_s > 0.0 && self.initial_s.is_finite()) {
            return Err(EngineError::InvalidConfig(format!(
                "initial_s must be positive, got {}",
                self.initial_s
            )));
        }
        Ok(())
    }
}

/// What is attacked: the original example, its label and an adversarial
/// starting point.
#[derive(Debug, Clone, Copy)]
pub struct AttackProblem<'a> {
    pub original: &'a InputVector,
    pub original_label: Label,
    pub start: &'a InputVector,
}

/// Per-iteration snapshot passed to observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iteration {
    pub index: u64,
    /// False when the proposal failed and no query was spent.
    pub queried: bool,
    pub improved: bool,
    pub d_min: f64,
    /// Controller state after this iteration's update.
    pub p: f64,
    pub s: f64,
}

pub fn run_attack<O: DecisionOracle + ?Sized>(
    oracle: &O,
    problem: AttackProblem<'_>,
    proposal: &mut dyn Proposal,
    config: &AttackConfig,
) -> Result<AttackTrace, EngineError> {
    run_attack_observed(oracle, problem, proposal, config, |_| {})
}

/// The random walk: propose, keep the proposal only if it is adversarial
/// and strictly closer, update the step controller, repeat until the
/// budget is spent.
///
/// The starting point is checked with one budgeted query. Proposals that
/// fail numerically cost no query but count as non-improving for the
/// controller. The walk also stops once failed proposals reach
/// `max_queries`, so a program that always fails terminates.
pub fn run_attack_observed<O: DecisionOracle + ?Sized>(
    oracle: &O,
    problem: AttackProblem<'_>,
    proposal: &mut dyn Proposal,
    config: &AttackConfig,
    mut observe: impl FnMut(&Iteration),
) -> Result<AttackTrace, EngineError> {
    config.validate()?;
    let AttackProblem {
        original,
        original_label,
        start,
    } = problem;
    let initial_distance = l2_distance(start, original)?;
    if oracle.input_shape().len() != original.len() {
        return Err(CoreError::ShapeMismatch {
            left: oracle.input_shape(),
            right: original.shape(),
        }
        .into());
    }

    let mut budget = QueryBudget::new(config.max_queries);
    let mut rng = rng_from(config.seed);
    let mut controller = StepController::new(config.initial_s);

    if !is_adversarial(oracle, start, original_label, &mut budget)? {
        return Err(EngineError::StartingPointNotAdversarial);
    }
    let mut points = vec![TracePoint {
        query_index: budget.used(),
        d_min: initial_distance,
        accepted: false,
    }];

    let mut current = start.clone();
    let mut d_min = initial_distance;
    let (mut proposals, mut numeric_failures) = (0u64, 0u64);

    while !budget.is_exhausted() && numeric_failures < config.max_queries {
        proposals += 1;
        let mut improved = false;
        let queried = match proposal.propose(&current, original, &mut rng, controller.s()) {
            Ok(candidate) if candidate.len() == original.len() => {
                let candidate = if config.clamp {
                    clamp_to_domain(candidate)
                } else {
                    candidate
                };
                let adversarial =
                    match is_adversarial(oracle, &candidate, original_label, &mut budget) {
                        Ok(adv) => adv,
                        Err(CoreError::BudgetExhausted { .. }) => break,
                        Err(e) => return Err(e.into()),
                    };
                if adversarial {
                    let d = l2_distance(&candidate, original)?;
                    if d < d_min {
                        d_min = d;
                        current = candidate;
                        improved = true;
                    }
                }
                points.push(TracePoint {
                    query_index: budget.used(),
                    d_min,
                    accepted: improved,
                });
                true
            }
            Ok(_) | Err(_) => {
                numeric_failures += 1;
                false
            }
        };

        proposal.observe(improved);
        controller.update(improved);
        observe(&Iteration {
            index: proposals,
            queried,
            improved,
            d_min,
            p: controller.p(),
            s: controller.s(),
        });
    }

    Ok(AttackTrace {
        points,
        final_example: current,
        seed: config.seed,
        initial_distance,
        proposals,
        numeric_failures,
    })
}
