use thiserror::Error;

use crate::domain::Shape;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("query budget of {max_queries} exhausted")]
    BudgetExhausted { max_queries: u64 },
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: Shape, right: Shape },
    #[error("{len} values do not fill shape {shape}")]
    LengthMismatch { len: usize, shape: Shape },
}
