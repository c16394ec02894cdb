use super::{Candidate, EvolutionConfig, Fitness};
use crate::dsl::GenProgram;
use crate::engine::{run_attack, AttackConfig, AttackProblem, ProgramProposal};
use crate::seed::derive;
use crate::victims::EvalInstance;

/// Fitness of a candidate: the mean final distance over the first
/// `fitness_images` instances. A candidate without a parsed program keeps
/// its failure.
pub fn evaluate_fitness(
    candidate: &Candidate,
    instances: &[EvalInstance],
    config: &EvolutionConfig,
) -> Fitness {
    match (candidate.fitness(), candidate.program()) {
        (Fitness::Failed { diagnostic }, _) => Fitness::Failed {
            diagnostic: diagnostic.clone(),
        },
        (_, None) => Fitness::Failed {
            diagnostic: "program did not parse".into(),
        },
        (_, Some(program)) => evaluate_program(program, candidate.id(), instances, config),
    }
}

/// Runs the attack once per instance with the seed derived from
/// `(config.seed, id, image index)`. A run where more than half of the
/// proposals fail numerically fails the whole candidate.
pub fn evaluate_program(
    program: &GenProgram,
    id: u64,
    instances: &[EvalInstance],
    config: &EvolutionConfig,
) -> Fitness {
    let used = &instances[..config.fitness_images.min(instances.len())];
    if used.is_empty() {
        return Fitness::Failed {
            diagnostic: "no evaluation instances".into(),
        };
    }
    let program = std::sync::Arc::new(program.clone());
    let mut total = 0.0;
    for (idx, inst) in used.iter().enumerate() {
        let attack = AttackConfig {
            max_queries: config.fitness_budget,
            initial_s: config.initial_s,
            seed: derive(&[config.seed, id, idx as u64]),
            clamp: true,
        };
        let mut proposal = ProgramProposal::new(program.clone());
        let problem = AttackProblem {
            original: &inst.original,
            original_label: inst.label,
            start: &inst.start,
        };
        let trace = match run_attack(inst.oracle.as_ref(), problem, &mut proposal, &attack) {
            Ok(t) => t,
            Err(e) => {
                return Fitness::Failed {
                    diagnostic: format!("image {idx}: {e}"),
                }
            }
        };
        if trace.numeric_failures * 2 > trace.proposals {
            return Fitness::Failed {
                diagnostic: format!(
                    "image {idx}: {} of {} proposals were not finite",
                    trace.numeric_failures, trace.proposals
                ),
            };
        }
        total += trace.final_distance();
    }
    Fitness::Value {
        value: total / used.len() as f64,
    }
}
