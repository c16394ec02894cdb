use std::fs;
use std::path::PathBuf;

use autoda_core::evolution::{
    best_of, resume_evolution, run_evolution, EvolutionConfig, EvolutionError, GenerationSummary,
    Population, RunStore,
};
use autoda_core::llm::{build_generator, GeneratorKind, LlmConfig, UreqTransport};
use autoda_core::report::RunManifest;
use serde::{Deserialize, Serialize};

use crate::args::{EvolveArgs, GeneratorChoice, VictimArgs};
use crate::attack::dir_stamp;
use crate::error::CliError;
use crate::victim::build_instances;
use crate::{timestamp, Globals};

const SETUP_FILE: &str = "setup.json";

/// What a run directory needs besides its config to be resumed.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Setup {
    victim: VictimArgs,
    generator: GeneratorChoice,
}

fn evolution_config(args: &EvolveArgs, seed: u64) -> EvolutionConfig {
    let d = EvolutionConfig::default();
    EvolutionConfig {
        generations: args.generations.unwrap_or(d.generations),
        pop_size: args.pop.unwrap_or(d.pop_size),
        crossover_prob: args.crossover_prob.unwrap_or(d.crossover_prob),
        mutation_prob: args.mutation_prob.unwrap_or(d.mutation_prob),
        fitness_images: args.fitness_images.unwrap_or(d.fitness_images),
        fitness_budget: args.fitness_budget.unwrap_or(d.fitness_budget),
        seed,
        parse_retries: args.parse_retries.unwrap_or(d.parse_retries),
        ..d
    }
}

fn generator_kind(
    choice: GeneratorChoice,
    args: &EvolveArgs,
    seed: u64,
) -> Result<GeneratorKind, CliError> {
    Ok(match choice {
        GeneratorChoice::Mock => GeneratorKind::Mock { seed },
        GeneratorChoice::Llm => {
            let mut config = LlmConfig::from_env();
            if let Some(url) = &args.base_url {
                config.base_url = url.clone();
            }
            if let Some(model) = &args.model {
                config.model_name = model.clone();
            }
            if let Some(t) = args.temperature {
                config.temperature = t;
            }
            config
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            if config.api_key.is_none() {
                log::warn!("no API key set; requests go out unauthenticated");
            }
            GeneratorKind::Llm(config)
        }
    })
}

fn print_table(history: &[Population]) {
    println!(
        "{:>10}  {:>12}  {:>12}  {:>6}",
        "generation", "best", "mean", "failed"
    );
    let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
    for pop in history {
        let s = GenerationSummary::of(pop);
        println!(
            "{:>10}  {:>12}  {:>12}  {:>6}",
            s.generation,
            num(s.best),
            num(s.mean),
            s.failed
        );
    }
}

pub fn run(args: EvolveArgs, globals: &Globals) -> Result<Vec<Population>, CliError> {
    let started_at = timestamp();
    let (store, config, setup, manifest_name) = match &args.resume {
        Some(dir) => {
            let store = RunStore::open(dir).map_err(|e| CliError::Config(e.to_string()))?;
            let (mut config, _) = store.load().map_err(|e| CliError::Config(e.to_string()))?;
            if let Some(g) = args.generations {
                config.generations = g;
            }
            let text = fs::read_to_string(dir.join(SETUP_FILE)).map_err(|e| {
                CliError::Config(format!("{}: {e}", dir.join(SETUP_FILE).display()))
            })?;
            let setup: Setup = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{SETUP_FILE}: {e}")))?;
            if args.victim != VictimArgs::default() && args.victim != setup.victim {
                log::warn!("victim flags ignored; resuming with the stored victim");
            }
            (store, config, setup, "manifest_resume.json")
        }
        None => {
            let config = evolution_config(&args, globals.seed);
            config
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            let dir = args
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("run/{}", dir_stamp())));
            if dir.join("config.json").exists() {
                return Err(CliError::Config(format!(
                    "{} already holds a run; use --resume",
                    dir.display()
                )));
            }
            let store = RunStore::create(&dir)?;
            let setup = Setup {
                victim: args.victim.clone(),
                generator: args.generator.unwrap_or(GeneratorChoice::Mock),
            };
            store.write_json(SETUP_FILE, &setup)?;
            (store, config, setup, "manifest.json")
        }
    };

    let instances = build_instances(&setup.victim, config.fitness_images, config.seed)?;
    let kind = generator_kind(setup.generator, &args, config.seed)?;
    let timeout = match &kind {
        GeneratorKind::Llm(c) => c.timeout,
        GeneratorKind::Mock { .. } => LlmConfig::default().timeout,
    };
    let mut generator = build_generator(kind, UreqTransport::new(timeout))
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut manifest = RunManifest::new(
        globals.argv.clone(),
        serde_json::json!({
            "evolution": config,
            "victim": setup.victim,
            "generator": setup.generator,
            "jobs": globals.jobs,
        }),
        config.seed,
        started_at,
    );
    store.write_json(manifest_name, &manifest)?;

    let result = match &args.resume {
        Some(_) => resume_evolution(
            &store,
            &mut *generator,
            &instances,
            Some(config.generations),
        ),
        None => run_evolution(&config, &mut *generator, &instances, Some(&store)),
    };
    let history = match result {
        Ok(h) => h,
        Err(EvolutionError::GeneratorUnavailable { source, history }) => {
            print_table(&history);
            eprintln!(
                "partial history of {} generation(s) kept in {}",
                history.len(),
                store.root().display()
            );
            return Err(CliError::GeneratorUnavailable(source.to_string()));
        }
        Err(e) => return Err(e.into()),
    };

    manifest.finished_at = Some(timestamp());
    store.write_json(manifest_name, &manifest)?;
    print_table(&history);
    let best = best_of(&history)?;
    println!(
        "best candidate {} (fitness {}), run in {}:",
        best.id(),
        best.fitness().key(),
        store.root().display()
    );
    println!("{}", best.source().trim_end());
    Ok(history)
}
