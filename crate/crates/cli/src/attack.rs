use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use autoda_core::dsl::{built_in, parse};
use autoda_core::engine::{
    boundary_attack_proposal, run_attack, AttackConfig, AttackProblem, EngineError,
    ProgramProposal, Proposal,
};
use autoda_core::report::{
    write_trace_csv, ComparisonTable, EvalReport, RunManifest, DEFAULT_CHECKPOINTS, DEFAULT_EPSILON,
};
use autoda_core::seed::derive;
use autoda_core::GenProgram;
use rayon::prelude::*;
use serde_json::json;

use crate::args::AttackArgs;
use crate::error::CliError;
use crate::victim::build_instances;
use crate::{timestamp, Globals};

pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

enum Attacker {
    Program(Arc<GenProgram>),
    Boundary,
}

impl Attacker {
    fn resolve(spec: &str) -> Result<(Self, String), CliError> {
        if spec == "boundary" {
            return Ok((Attacker::Boundary, "boundary".into()));
        }
        if let Some(name) = spec.strip_prefix("builtin:") {
            let program = built_in(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown built-in `{name}`; expected `final` or `initial`"
                ))
            })?;
            return Ok((Attacker::Program(Arc::new(program)), name.to_string()));
        }
        let path = Path::new(spec);
        let source = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read program {spec}: {e}")))?;
        let program = parse(&source).map_err(|source| CliError::Program {
            path: spec.to_string(),
            source,
        })?;
        let label = path
            .file_stem()
            .map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
        Ok((Attacker::Program(Arc::new(program)), label))
    }

    fn proposal(&self) -> Box<dyn Proposal> {
        match self {
            Attacker::Program(p) => Box::new(ProgramProposal::new(Arc::clone(p))),
            Attacker::Boundary => Box::new(boundary_attack_proposal()),
        }
    }
}

fn check_checkpoints(checkpoints: &[u64]) -> Result<(), CliError> {
    if checkpoints.is_empty() || checkpoints.contains(&0) {
        return Err(CliError::Config(
            "--checkpoints needs positive query counts".into(),
        ));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(
            "--checkpoints must be strictly increasing".into(),
        ));
    }
    Ok(())
}

pub fn run(args: AttackArgs, globals: &Globals) -> Result<EvalReport, CliError> {
    let started_at = timestamp();
    let (attacker, default_label) =
        Attacker::resolve(args.program.as_deref().unwrap_or("builtin:final"))?;
    let label = args.label.clone().unwrap_or(default_label);
    let images = args.images.unwrap_or(8);
    if images == 0 {
        return Err(CliError::Config("--images must be at least 1".into()));
    }
    let epsilon = args.epsilon.unwrap_or(DEFAULT_EPSILON);
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(CliError::Config(format!("bad --epsilon {epsilon}")));
    }
    let checkpoints = args
        .checkpoints
        .clone()
        .unwrap_or_else(|| DEFAULT_CHECKPOINTS.to_vec());
    check_checkpoints(&checkpoints)?;
    let base = AttackConfig {
        max_queries: args.budget.unwrap_or(10_000),
        initial_s: args.initial_s.unwrap_or(AttackConfig::default().initial_s),
        seed: globals.seed,
        ..AttackConfig::default()
    };
    base.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let instances = build_instances(&args.victim, images, globals.seed)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("run/{}-attack", dir_stamp())));
    fs::create_dir_all(&out)?;

    let traces = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let config = AttackConfig {
                seed: derive(&[globals.seed, i as u64]),
                ..base
            };
            let problem = AttackProblem {
                original: &inst.original,
                original_label: inst.label,
                start: &inst.start,
            };
            run_attack(
                inst.oracle.as_ref(),
                problem,
                attacker.proposal().as_mut(),
                &config,
            )
            .map_err(|e| match e {
                EngineError::InvalidConfig(m) => CliError::Config(m),
                e => CliError::Victim(format!("image {i}: {e}")),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    for (i, trace) in traces.iter().enumerate() {
        let file = File::create(out.join(format!("trace_{i:03}.csv")))?;
        write_trace_csv(BufWriter::new(file), &trace.points)?;
    }
    let mut report = EvalReport::from_traces(&label, &traces, &checkpoints, epsilon);
    report.manifest = Some(MANIFEST_FILE.into());
    report.save(out.join(REPORT_FILE))?;

    let config = json!({
        "victim": args.victim,
        "program": args.program.as_deref().unwrap_or("builtin:final"),
        "label": label,
        "budget": base.max_queries,
        "images": images,
        "epsilon": if epsilon.is_finite() { json!(epsilon) } else { json!("inf") },
        "checkpoints": checkpoints,
        "initial_s": base.initial_s,
        "jobs": globals.jobs,
    });
    let mut manifest = RunManifest::new(globals.argv.clone(), config, globals.seed, started_at);
    manifest.finished_at = Some(timestamp());
    fs::write(
        out.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )?;

    print!(
        "{}",
        ComparisonTable::from_reports(std::slice::from_ref(&report))?.to_text()
    );
    println!(
        "wrote {} traces and {REPORT_FILE} to {}",
        traces.len(),
        out.display()
    );
    Ok(report)
}

pub(crate) fn dir_stamp() -> String {
    chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string()
}
