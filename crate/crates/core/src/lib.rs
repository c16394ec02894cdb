//! Decision-based adversarial attacks driven by evolved `generate`
//! programs.
//!
//! The crate is organized around the pieces of the pipeline:
//!
//! - [`domain`]: input vectors, labels, the label-only oracle contract and
//!   query budgets.
//! - [`dsl`]: the sandboxed language candidate programs are written in.
//! - [`engine`]: the random-walk attack loop and its step-size controller,
//!   plus the Boundary Attack baseline proposal.
//! - [`victims`]: analytic and learned victim classifiers.
//! - [`evolution`]: the population loop that breeds new programs.
//! - [`llm`]: program generators backed by a chat-completions endpoint, and
//!   a deterministic offline mock.
//! - [`report`]: checkpoint metrics, trace files and comparison tables.

pub mod domain;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod evolution;
pub mod llm;
pub mod report;
pub mod seed;
pub mod victims;

pub use domain::{
    clamp_to_domain, is_adversarial, l2_distance, AttackTrace, DecisionOracle, InputVector, Label,
    QueryBudget, Shape, TracePoint,
};
pub use dsl::{parse, pretty_print, DslError, GenProgram};
pub use error::CoreError;
