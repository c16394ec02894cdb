mod args;
mod attack;
mod error;
mod evolve;
mod settings;
mod victim;

use std::fs;
use std::process::ExitCode;

use autoda_core::dsl::{parse, pretty_print};
use autoda_core::report::{ComparisonTable, EvalReport};
use clap::Parser;

use crate::args::{Cli, Command, DslCommand, ReportArgs};
use crate::error::CliError;
use crate::settings::FileConfig;

/// Settings shared by every subcommand.
pub struct Globals {
    pub seed: u64,
    pub jobs: usize,
    pub argv: Vec<String>,
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn report(args: ReportArgs) -> Result<(), CliError> {
    let reports = args
        .reports
        .iter()
        .map(|p| EvalReport::load(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    let table = ComparisonTable::from_reports(&reports)?;
    let text = table.to_text();
    if let Some(path) = &args.csv {
        fs::write(path, table.to_csv())?;
    }
    if let Some(path) = &args.text {
        fs::write(path, &text)?;
    }
    print!("{text}");
    Ok(())
}

fn dsl_check(path: &std::path::Path) -> Result<(), CliError> {
    let source = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let program = parse(&source).map_err(|source| CliError::Program {
        path: path.display().to_string(),
        source,
    })?;
    print!("{}", pretty_print(&program));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let jobs = cli
        .jobs
        .or(file.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let globals = Globals {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        jobs,
        argv: std::env::args().collect(),
    };
    match cli.command {
        Command::Attack(a) => attack::run(file.layer("attack", &a)?, &globals).map(drop),
        Command::Evolve(a) => evolve::run(file.layer("evolve", &a)?, &globals).map(drop),
        Command::Report(a) => report(file.layer("report", &a)?),
        Command::Dsl {
            command: DslCommand::Check { file },
        } => dsl_check(&file),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
