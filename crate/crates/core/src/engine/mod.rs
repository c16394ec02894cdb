//! The random-walk attack loop, its step-size controller and the proposal
//! functions it can drive.

mod boundary;
mod controller;
mod proposal;
mod run;

use thiserror::Error;

pub use boundary::{boundary_attack_proposal, BoundaryParams, BoundaryProposal};
pub use controller::{f_of_p, update_p, update_s, StepController, TARGET_RATE};
pub use proposal::{NumericError, ProgramProposal, Proposal};
pub use run::{run_attack, run_attack_observed, AttackConfig, AttackProblem, Iteration};

use crate::error::CoreError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("the starting point is not adversarial")]
    StartingPointNotAdversarial,
    #[error("invalid attack configuration: {0}")]
    InvalidConfig(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}
