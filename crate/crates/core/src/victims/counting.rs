use std::sync::atomic::{AtomicU64, Ordering};

use crate::domain::{DecisionOracle, InputVector, Label, Shape};

/// Forwards to an inner oracle and counts every forwarded query.
#[derive(Debug)]
pub struct CountingOracle<O> {
    inner: O,
    count: AtomicU64,
}

impl<O: DecisionOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: DecisionOracle> DecisionOracle for CountingOracle<O> {
    fn label_of(&self, x: &InputVector) -> Label {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.label_of(x)
    }

    fn class_count(&self) -> usize {
        self.inner.class_count()
    }

    fn input_shape(&self) -> Shape {
        self.inner.input_shape()
    }
}
