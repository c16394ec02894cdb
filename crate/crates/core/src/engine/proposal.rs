use std::sync::Arc;

use thiserror::Error;

use crate::domain::InputVector;
use crate::dsl::{evaluate, EvalContext, GenProgram};
use crate::seed::{standard_normal, SeededRng};

/// A proposal that could not be turned into a usable point.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("proposal failed: {0}")]
pub struct NumericError(pub String);

/// The `generate` step of the random walk.
///
/// Implementations see the current point, the original example, the run's
/// random stream and the controller's step scalar. They never see the
/// victim.
pub trait Proposal: Send {
    fn propose(
        &mut self,
        current: &InputVector,
        original: &InputVector,
        rng: &mut SeededRng,
        s: f64,
    ) -> Result<InputVector, NumericError>;

    /// Called once per iteration with the improvement indicator.
    fn observe(&mut self, _improved: bool) {}
}

/// Runs a DSL program as the proposal. A fresh standard-normal `noise`
/// vector is drawn from the run's stream before every evaluation.
#[derive(Debug, Clone)]
pub struct ProgramProposal {
    program: Arc<GenProgram>,
}

impl ProgramProposal {
    pub fn new(program: impl Into<Arc<GenProgram>>) -> Self {
        Self {
            program: program.into(),
        }
    }

    pub fn program(&self) -> &GenProgram {
        &self.program
    }
}

impl Proposal for ProgramProposal {
    fn propose(
        &mut self,
        current: &InputVector,
        original: &InputVector,
        rng: &mut SeededRng,
        s: f64,
    ) -> Result<InputVector, NumericError> {
        let noise = standard_normal(rng, original.shape());
        let mut ctx = EvalContext {
            x0: original,
            x1: current,
            noise: &noise,
            s,
            rng,
        };
        evaluate(&self.program, &mut ctx).map_err(|e| NumericError(e.to_string()))
    }
}
