//! Population search over `generate` programs.
//!
//! Generation 0 is filled by the generator's initialization call. Every
//! later generation breeds `pop_size` children from tournament-selected
//! parents, evaluates them, and keeps the best `pop_size` of parents and
//! children together.

mod candidate;
mod fitness;
mod run;
mod store;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use candidate::{best_of, Candidate, Fitness, Population};
pub use fitness::{evaluate_fitness, evaluate_program};
pub use run::{resume_evolution, run_evolution};
pub use store::{GenerationSummary, RunStore};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    /// Evolved generations after the initial one.
    pub generations: u32,
    pub pop_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub fitness_images: usize,
    pub fitness_budget: u64,
    pub seed: u64,
    /// Regeneration attempts after a parse failure before a slot is
    /// filled with a failed placeholder.
    pub parse_retries: u32,
    pub initial_s: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            generations: 20,
            pop_size: 10,
            crossover_prob: 1.0,
            mutation_prob: 0.5,
            fitness_images: 8,
            fitness_budget: 8000,
            seed: 0,
            parse_retries: 3,
            initial_s: 0.001,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let invalid = |m: String| Err(EvolutionError::InvalidConfig(m));
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return invalid(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.generations == 0 {
            return invalid("generations must be at least 1".into());
        }
        if self.pop_size == 0 || self.fitness_images == 0 || self.fitness_budget == 0 {
            return invalid(
                "pop_size, fitness_images and fitness_budget must be at least 1".into(),
            );
        }
        if !(self.initial_s > 0.0 && self.initial_s.is_finite()) {
            return invalid(format!(
                "initial_s must be positive, got {}",
                self.initial_s
            ));
        }
        Ok(())
    }
}

/// What a generator call knows about its slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationContext {
    pub generation: u32,
    pub slot: usize,
    /// 0 for the first try, counting up on regeneration after a parse
    /// failure.
    pub attempt: u32,
    /// Seed private to this call.
    pub seed: u64,
    pub fitness_a: Option<f64>,
    pub fitness_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    /// The backend could not be reached after its retry policy.
    #[error("program generator unavailable: {0}")]
    Unavailable(String),
    #[error("the completion contained no program text")]
    EmptyCompletion,
}

/// Source of program text. Outputs are validated by the caller.
pub trait ProgramGenerator {
    fn init_program(&mut self, ctx: &GenerationContext) -> Result<String, GeneratorError>;

    fn crossover(
        &mut self,
        parent_a: &str,
        parent_b: &str,
        ctx: &GenerationContext,
    ) -> Result<String, GeneratorError>;

    fn mutate(&mut self, parent: &str, ctx: &GenerationContext) -> Result<String, GeneratorError>;
}

impl<G: ProgramGenerator + ?Sized> ProgramGenerator for &mut G {
    fn init_program(&mut self, ctx: &GenerationContext) -> Result<String, GeneratorError> {
        (**self).init_program(ctx)
    }

    fn crossover(
        &mut self,
        a: &str,
        b: &str,
        ctx: &GenerationContext,
    ) -> Result<String, GeneratorError> {
        (**self).crossover(a, b, ctx)
    }

    fn mutate(&mut self, parent: &str, ctx: &GenerationContext) -> Result<String, GeneratorError> {
        (**self).mutate(parent, ctx)
    }
}

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("invalid evolution config: {0}")]
    InvalidConfig(String),
    #[error("every candidate of the final generation failed")]
    AllFailed,
    #[error("empty generation history")]
    EmptyHistory,
    #[error("{source}")]
    GeneratorUnavailable {
        source: GeneratorError,
        /// Generations completed before the generator gave up.
        history: Vec<Population>,
    },
    #[error("no evaluation instances")]
    NoInstances,
    #[error("run directory: {0}")]
    Store(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
