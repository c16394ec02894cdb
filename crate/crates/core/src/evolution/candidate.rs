use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EvolutionError;
use crate::dsl::GenProgram;

/// Fitness of a candidate; lower values are better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Fitness {
    Unevaluated,
    Value { value: f64 },
    Failed { diagnostic: String },
}

impl Fitness {
    pub fn value(&self) -> Option<f64> {
        match self {
            Fitness::Value { value } => Some(*value),
            _ => None,
        }
    }

    /// Sort key: failed and unevaluated candidates rank as `+inf`.
    pub fn key(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, Fitness::Failed { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    id: u64,
    source: String,
    program: Option<Arc<GenProgram>>,
    fitness: Fitness,
    parent_ids: Vec<u64>,
    generation_born: u32,
}

impl Candidate {
    pub fn new(
        id: u64,
        source: String,
        program: Option<Arc<GenProgram>>,
        parent_ids: Vec<u64>,
        generation_born: u32,
    ) -> Self {
        Self {
            id,
            source,
            program,
            fitness: Fitness::Unevaluated,
            parent_ids,
            generation_born,
        }
    }

    /// A slot whose program never parsed.
    pub fn failed(
        id: u64,
        source: String,
        diagnostic: String,
        parent_ids: Vec<u64>,
        generation_born: u32,
    ) -> Self {
        Self {
            id,
            source,
            program: None,
            fitness: Fitness::Failed { diagnostic },
            parent_ids,
            generation_born,
        }
    }

    pub(crate) fn restored(
        id: u64,
        source: String,
        program: Option<Arc<GenProgram>>,
        fitness: Fitness,
        parent_ids: Vec<u64>,
        generation_born: u32,
    ) -> Self {
        Self {
            id,
            source,
            program,
            fitness,
            parent_ids,
            generation_born,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn program(&self) -> Option<&Arc<GenProgram>> {
        self.program.as_ref()
    }

    pub fn fitness(&self) -> &Fitness {
        &self.fitness
    }

    pub fn parent_ids(&self) -> &[u64] {
        &self.parent_ids
    }

    pub fn generation_born(&self) -> u32 {
        self.generation_born
    }

    /// Sets the fitness once. Later calls leave it unchanged and return
    /// false.
    pub fn set_fitness(&mut self, fitness: Fitness) -> bool {
        if self.fitness != Fitness::Unevaluated {
            return false;
        }
        self.fitness = fitness;
        true
    }

    /// Ranking order: fitness ascending, then id.
    pub fn rank_cmp(&self, other: &Candidate) -> Ordering {
        self.fitness
            .key()
            .total_cmp(&other.fitness.key())
            .then(self.id.cmp(&other.id))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub generation: u32,
    pub members: Vec<Candidate>,
}

impl Population {
    /// Builds a population with members in ranking order.
    pub fn ranked(generation: u32, mut members: Vec<Candidate>) -> Self {
        members.sort_by(Candidate::rank_cmp);
        Self {
            generation,
            members,
        }
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.members.iter().min_by(|a, b| a.rank_cmp(b))
    }

    pub fn best_fitness(&self) -> Option<f64> {
        self.best().and_then(|c| c.fitness.value())
    }

    /// Mean over members with a fitness value.
    pub fn mean_fitness(&self) -> Option<f64> {
        let values: Vec<f64> = self
            .members
            .iter()
            .filter_map(|c| c.fitness.value())
            .collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }

    pub fn failed_count(&self) -> usize {
        self.members
            .iter()
            .filter(|c| c.fitness.is_failed())
            .count()
    }
}

/// Lowest-fitness candidate of the last generation, ties to the lowest id.
pub fn best_of(history: &[Population]) -> Result<&Candidate, EvolutionError> {
    let last = history.last().ok_or(EvolutionError::EmptyHistory)?;
    match last.best() {
        Some(c) if c.fitness.value().is_some() => Ok(c),
        _ => Err(EvolutionError::AllFailed),
    }
}
