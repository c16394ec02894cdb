use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::fitness::evaluate_fitness;
use super::{
    Candidate, EvolutionConfig, EvolutionError, GenerationContext, GeneratorError, Population,
    ProgramGenerator, RunStore,
};
use crate::dsl::parse;
use crate::seed::{derive, rng_from, SeededRng};
use crate::victims::EvalInstance;

/// Runs generation 0 and `config.generations` evolved generations,
/// returning the full history. With a store, every generation is written
/// to disk as soon as it is complete.
pub fn run_evolution<G: ProgramGenerator + ?Sized>(
    config: &EvolutionConfig,
    generator: &mut G,
    instances: &[EvalInstance],
    store: Option<&RunStore>,
) -> Result<Vec<Population>, EvolutionError> {
    config.validate()?;
    if instances.is_empty() {
        return Err(EvolutionError::NoInstances);
    }
    if let Some(store) = store {
        store.write_config(config)?;
    }
    continue_from(config, generator, instances, store, Vec::new())
}

/// Continues a stored run from its last complete generation.
/// `generations` overrides the stored target.
pub fn resume_evolution<G: ProgramGenerator + ?Sized>(
    store: &RunStore,
    generator: &mut G,
    instances: &[EvalInstance],
    generations: Option<u32>,
) -> Result<Vec<Population>, EvolutionError> {
    let (mut config, history) = store.load()?;
    if let Some(g) = generations {
        config.generations = g;
    }
    config.validate()?;
    if instances.is_empty() {
        return Err(EvolutionError::NoInstances);
    }
    store.write_config(&config)?;
    continue_from(&config, generator, instances, Some(store), history)
}

fn continue_from<G: ProgramGenerator + ?Sized>(
    config: &EvolutionConfig,
    generator: &mut G,
    instances: &[EvalInstance],
    store: Option<&RunStore>,
    mut history: Vec<Population>,
) -> Result<Vec<Population>, EvolutionError> {
    let unavailable = |source: GeneratorError, history: Vec<Population>| {
        EvolutionError::GeneratorUnavailable { source, history }
    };

    if history.is_empty() {
        let members = match initial_members(config, generator) {
            Ok(m) => m,
            Err(e) => return Err(unavailable(e, history)),
        };
        let pop = evaluate(0, members, instances, config);
        finish(&pop, store)?;
        history.push(pop);
    }

    while history.last().map_or(0, |p| p.generation) < config.generations {
        let parents = history.last().expect("history is not empty");
        let generation = parents.generation + 1;
        let children = match breed(config, generator, parents, generation) {
            Ok(c) => c,
            Err(e) => return Err(unavailable(e, history)),
        };
        let children = evaluate(generation, children, instances, config).members;
        let mut pool = parents.members.clone();
        pool.extend(children);
        let mut next = Population::ranked(generation, pool);
        next.members.truncate(config.pop_size);
        finish(&next, store)?;
        history.push(next);
    }
    Ok(history)
}

fn finish(pop: &Population, store: Option<&RunStore>) -> Result<(), EvolutionError> {
    log::info!(
        "generation {}: best {:?}, mean {:?}, failed {}",
        pop.generation,
        pop.best_fitness(),
        pop.mean_fitness(),
        pop.failed_count()
    );
    match store {
        Some(s) => s.write_generation(pop),
        None => Ok(()),
    }
}

fn evaluate(
    generation: u32,
    mut members: Vec<Candidate>,
    instances: &[EvalInstance],
    config: &EvolutionConfig,
) -> Population {
    members.par_iter_mut().for_each(|c| {
        let fitness = evaluate_fitness(c, instances, config);
        c.set_fitness(fitness);
    });
    Population::ranked(generation, members)
}

fn call_seed(config: &EvolutionConfig, generation: u32, slot: usize, attempt: u32) -> u64 {
    derive(&[config.seed, generation as u64, slot as u64, attempt as u64])
}

/// Calls `produce` until its text parses or the retries run out.
fn parsed_candidate<G: ProgramGenerator + ?Sized>(
    config: &EvolutionConfig,
    generator: &mut G,
    mut ctx: GenerationContext,
    id: u64,
    parent_ids: Vec<u64>,
    mut produce: impl FnMut(&mut G, &GenerationContext) -> Result<String, GeneratorError>,
    deterministic: bool,
) -> Result<Candidate, GeneratorError> {
    let mut last = (String::new(), String::new());
    for attempt in 0..=config.parse_retries {
        ctx.attempt = attempt;
        ctx.seed = call_seed(config, ctx.generation, ctx.slot, attempt);
        let text = match produce(generator, &ctx) {
            Ok(t) => t,
            Err(GeneratorError::EmptyCompletion) => {
                last = (String::new(), GeneratorError::EmptyCompletion.to_string());
                continue;
            }
            Err(e) => return Err(e),
        };
        match parse(&text) {
            Ok(program) => {
                return Ok(Candidate::new(
                    id,
                    text,
                    Some(Arc::new(program)),
                    parent_ids,
                    ctx.generation,
                ));
            }
            Err(e) => last = (text, e.to_string()),
        }
        if deterministic {
            break;
        }
    }
    let (text, diagnostic) = last;
    Ok(Candidate::failed(
        id,
        text,
        diagnostic,
        parent_ids,
        ctx.generation,
    ))
}

fn initial_members<G: ProgramGenerator + ?Sized>(
    config: &EvolutionConfig,
    generator: &mut G,
) -> Result<Vec<Candidate>, GeneratorError> {
    (0..config.pop_size)
        .map(|slot| {
            let ctx = GenerationContext {
                generation: 0,
                slot,
                attempt: 0,
                seed: 0,
                fitness_a: None,
                fitness_b: None,
            };
            parsed_candidate(
                config,
                generator,
                ctx,
                slot as u64,
                Vec::new(),
                |g, c| g.init_program(c),
                false,
            )
        })
        .collect()
}

/// Size-2 tournament over the ranked population: the better of two
/// uniform draws.
fn tournament<'p>(pop: &'p Population, rng: &mut SeededRng) -> &'p Candidate {
    let a = &pop.members[rng.gen_range(0..pop.members.len())];
    let b = &pop.members[rng.gen_range(0..pop.members.len())];
    if b.rank_cmp(a).is_lt() {
        b
    } else {
        a
    }
}

fn breed<G: ProgramGenerator + ?Sized>(
    config: &EvolutionConfig,
    generator: &mut G,
    parents: &Population,
    generation: u32,
) -> Result<Vec<Candidate>, GeneratorError> {
    let mut rng = rng_from(derive(&[config.seed, generation as u64]));
    let mut children = Vec::with_capacity(config.pop_size);
    for slot in 0..config.pop_size {
        let a = tournament(parents, &mut rng);
        let b = tournament(parents, &mut rng);
        let crossover = rng.gen::<f64>() < config.crossover_prob;
        let mutation = rng.gen::<f64>() < config.mutation_prob;

        let parent_ids = if crossover {
            vec![a.id(), b.id()]
        } else {
            vec![a.id()]
        };
        let ctx = GenerationContext {
            generation,
            slot,
            attempt: 0,
            seed: 0,
            fitness_a: a.fitness().value(),
            fitness_b: if crossover { b.fitness().value() } else { None },
        };
        let id = generation as u64 * config.pop_size as u64 + slot as u64;
        let child = parsed_candidate(
            config,
            generator,
            ctx,
            id,
            parent_ids,
            |g, c| {
                let text = if crossover {
                    g.crossover(a.source(), b.source(), c)?
                } else {
                    a.source().to_string()
                };
                if mutation {
                    g.mutate(&text, c)
                } else {
                    Ok(text)
                }
            },
            !crossover && !mutation,
        )?;
        children.push(child);
    }
    Ok(children)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::victims::{sphere_instances, SphereSetup};

    /// Returns its parent unchanged; initial programs are deterministic so
    /// fitness does not depend on the noise stream.
    struct Identity;

    const BANK: [&str; 3] = [
        "return x1",
        "return x1 + s * (x0 - x1)",
        "return x1 + 10 * s * (x0 - x1)",
    ];

    impl ProgramGenerator for Identity {
        fn init_program(&mut self, ctx: &GenerationContext) -> Result<String, GeneratorError> {
            Ok(BANK[ctx.slot % BANK.len()].to_string())
        }
        fn crossover(
            &mut self,
            a: &str,
            _b: &str,
            _ctx: &GenerationContext,
        ) -> Result<String, GeneratorError> {
            Ok(a.to_string())
        }
        fn mutate(&mut self, p: &str, _ctx: &GenerationContext) -> Result<String, GeneratorError> {
            Ok(p.to_string())
        }
    }

    fn config() -> EvolutionConfig {
        EvolutionConfig {
            generations: 4,
            pop_size: 4,
            fitness_images: 2,
            fitness_budget: 200,
            seed: 3,
            ..EvolutionConfig::default()
        }
    }

    #[test]
    fn identity_generator_keeps_best_constant() {
        let inst = sphere_instances(4, 2, 1, SphereSetup::default());
        let history = run_evolution(&config(), &mut Identity, &inst, None).unwrap();
        assert_eq!(history.len(), 5);
        let best: Vec<f64> = history.iter().map(|p| p.best_fitness().unwrap()).collect();
        assert!(best.windows(2).all(|w| w[0] == w[1]), "{best:?}");
        for p in &history {
            assert_eq!(p.members.len(), 4);
        }
    }

    struct Garbage {
        calls: usize,
    }

    impl ProgramGenerator for Garbage {
        fn init_program(&mut self, _ctx: &GenerationContext) -> Result<String, GeneratorError> {
            self.calls += 1;
            Ok("return (".into())
        }
        fn crossover(
            &mut self,
            a: &str,
            _b: &str,
            _ctx: &GenerationContext,
        ) -> Result<String, GeneratorError> {
            Ok(a.into())
        }
        fn mutate(&mut self, p: &str, _ctx: &GenerationContext) -> Result<String, GeneratorError> {
            Ok(p.into())
        }
    }

    #[test]
    fn parse_failures_retry_then_fail() {
        let inst = sphere_instances(4, 2, 1, SphereSetup::default());
        let cfg = EvolutionConfig {
            generations: 1,
            pop_size: 2,
            ..config()
        };
        let mut g = Garbage { calls: 0 };
        let history = run_evolution(&cfg, &mut g, &inst, None).unwrap();
        assert_eq!(g.calls, 2 * 4);
        assert!(history[0].members.iter().all(|c| c.fitness().is_failed()));
    }

    struct Offline;

    impl ProgramGenerator for Offline {
        fn init_program(&mut self, ctx: &GenerationContext) -> Result<String, GeneratorError> {
            Identity.init_program(ctx)
        }
        fn crossover(
            &mut self,
            _a: &str,
            _b: &str,
            _ctx: &GenerationContext,
        ) -> Result<String, GeneratorError> {
            Err(GeneratorError::Unavailable("down".into()))
        }
        fn mutate(&mut self, p: &str, _ctx: &GenerationContext) -> Result<String, GeneratorError> {
            Ok(p.into())
        }
    }

    #[test]
    fn unavailable_generator_returns_partial_history() {
        let inst = sphere_instances(4, 2, 1, SphereSetup::default());
        match run_evolution(&config(), &mut Offline, &inst, None) {
            Err(EvolutionError::GeneratorUnavailable { history, .. }) => {
                assert_eq!(history.len(), 1)
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
