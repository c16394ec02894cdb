//! A small vector-arithmetic language for `generate` programs.
//!
//! A program sees four inputs: the original example `x0`, the current
//! adversarial point `x1`, a standard-normal vector `noise` and the step
//! scalar `s`, and returns the next proposal. The language has no loops,
//! no I/O and no access to the victim.

mod ast;
mod builtin;
mod eval;
mod lexer;
mod parser;
mod printer;

use thiserror::Error;

pub use ast::{BinOp, Expr, GenProgram, Kind, Statement, INPUTS};
pub use builtin::{built_in, built_in_final, built_in_initial, FINAL_SOURCE, INITIAL_SOURCE};
pub use eval::{evaluate, EvalContext};
pub use parser::parse;
pub use printer::{expr_to_string, pretty_print};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("type error at {path}: expected {expected}, {message}")]
    Type {
        path: String,
        expected: Kind,
        message: String,
    },
    #[error("unbound identifier `{0}`")]
    UnboundIdentifier(String),
    #[error("`{0}` is already bound")]
    Redefinition(String),
    #[error("`{0}` is a reserved function name")]
    ReservedName(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("inconsistent context lengths: x0 {x0}, x1 {x1}, noise {noise}")]
    ContextShape { x0: usize, x1: usize, noise: usize },
}

impl DslError {
    /// True for errors raised while evaluating a valid program.
    pub fn is_numeric(&self) -> bool {
        matches!(self, DslError::Numeric(_))
    }
}
