//! Shared domain types: input vectors, labels, the label-only oracle
//! contract and query budgets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Layout of an input vector. Images are stored channel-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    Flat(usize),
    Chw(usize, usize, usize),
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Flat(d) => d,
            Shape::Chw(c, h, w) => c * h * w,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Flat(d) => write!(f, "({d})"),
            Shape::Chw(c, h, w) => write!(f, "({c}, {h}, {w})"),
        }
    }
}

/// A point of the input space. Components are expected to lie in `[0, 1]`
/// once [`clamp_to_domain`] has been applied; arithmetic intermediates may
/// leave the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputVector {
    data: Vec<f64>,
    shape: Shape,
}

impl InputVector {
    pub fn new(data: Vec<f64>, shape: Shape) -> Result<Self, CoreError> {
        if data.len() != shape.len() {
            return Err(CoreError::LengthMismatch {
                len: data.len(),
                shape,
            });
        }
        Ok(Self { data, shape })
    }

    pub fn flat(data: Vec<f64>) -> Self {
        let shape = Shape::Flat(data.len());
        Self { data, shape }
    }

    pub fn filled(shape: Shape, value: f64) -> Self {
        Self {
            data: vec![value; shape.len()],
            shape,
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Same data reinterpreted under a different shape of equal size.
    pub fn reshaped(self, shape: Shape) -> Result<Self, CoreError> {
        Self::new(self.data, shape)
    }

    pub fn is_in_domain(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

/// Predicted class index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label(pub usize);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A victim classifier seen through its top-1 label only.
///
/// Implementations must be deterministic and total over in-range inputs.
pub trait DecisionOracle: Send + Sync {
    fn label_of(&self, x: &InputVector) -> Label;
    fn class_count(&self) -> usize;
    fn input_shape(&self) -> Shape;
}

impl<T: DecisionOracle + ?Sized> DecisionOracle for &T {
    fn label_of(&self, x: &InputVector) -> Label {
        (**self).label_of(x)
    }
    fn class_count(&self) -> usize {
        (**self).class_count()
    }
    fn input_shape(&self) -> Shape {
        (**self).input_shape()
    }
}

impl<T: DecisionOracle + ?Sized> DecisionOracle for std::sync::Arc<T> {
    fn label_of(&self, x: &InputVector) -> Label {
        (**self).label_of(x)
    }
    fn class_count(&self) -> usize {
        (**self).class_count()
    }
    fn input_shape(&self) -> Shape {
        (**self).input_shape()
    }
}

/// Oracle-query allowance owned by a single attack run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryBudget {
    max_queries: u64,
    used: u64,
}

impl QueryBudget {
    pub fn new(max_queries: u64) -> Self {
        Self {
            max_queries,
            used: 0,
        }
    }

    pub fn max_queries(&self) -> u64 {
        self.max_queries
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.max_queries - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.max_queries
    }

    fn charge(&mut self) -> Result<(), CoreError> {
        if self.is_exhausted() {
            return Err(CoreError::BudgetExhausted {
                max_queries: self.max_queries,
            });
        }
        self.used += 1;
        Ok(())
    }
}

/// One oracle query of an attack run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub query_index: u64,
    pub d_min: f64,
    pub accepted: bool,
}

/// Query-indexed record of a single attack run.
///
/// `points` holds one entry per oracle query, the starting-point check
/// included, so `points.len()` equals the number of queries spent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackTrace {
    pub points: Vec<TracePoint>,
    pub final_example: InputVector,
    pub seed: u64,
    pub initial_distance: f64,
    /// Calls to the proposal function, including failed ones.
    pub proposals: u64,
    /// Proposals that produced a non-finite vector.
    pub numeric_failures: u64,
}

impl AttackTrace {
    pub fn queries_used(&self) -> u64 {
        self.points.last().map_or(0, |p| p.query_index)
    }

    pub fn final_distance(&self) -> f64 {
        self.points
            .last()
            .map_or(self.initial_distance, |p| p.d_min)
    }

    /// Best distance known after `query` queries: `d_min` at the largest
    /// recorded query index not exceeding `query`.
    pub fn distance_at(&self, query: u64) -> f64 {
        let idx = self.points.partition_point(|p| p.query_index <= query);
        if idx == 0 {
            self.initial_distance
        } else {
            self.points[idx - 1].d_min
        }
    }

    pub fn acceptances(&self) -> usize {
        self.points.iter().filter(|p| p.accepted).count()
    }
}

/// Queries the oracle once and reports whether `x` is misclassified
/// relative to `original_label`.
pub fn is_adversarial<O: DecisionOracle + ?Sized>(
    oracle: &O,
    x: &InputVector,
    original_label: Label,
    budget: &mut QueryBudget,
) -> Result<bool, CoreError> {
    budget.charge()?;
    Ok(oracle.label_of(x) != original_label)
}

pub fn l2_distance(a: &InputVector, b: &InputVector) -> Result<f64, CoreError> {
    if a.len() != b.len() {
        return Err(CoreError::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(squared_l2(a.data(), b.data()).sqrt())
}

pub(crate) fn squared_l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn clamp_to_domain(mut x: InputVector) -> InputVector {
    for v in x.data_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    x
}
