use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "autoda",
    version,
    about = "Decision-based attacks with evolved proposal programs"
)]
pub struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-image attacks and fitness evaluation.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// TOML file with defaults for any flag; flags given on the command
    /// line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Attack a set of images and write traces and a report.
    Attack(AttackArgs),
    /// Evolve proposal programs.
    Evolve(EvolveArgs),
    /// Compare reports at their checkpoints.
    Report(ReportArgs),
    /// Work with program files.
    Dsl {
        #[command(subcommand)]
        command: DslCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum DslCommand {
    /// Parse and type-check a program, printing its canonical form.
    Check { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VictimKind {
    Sphere,
    Hyperplane,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorChoice {
    Mock,
    Llm,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, rename_all = "kebab-case")]
pub struct VictimArgs {
    #[arg(long, value_enum)]
    pub victim: Option<VictimKind>,
    /// Input dimension of the analytic victims.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Network weights (JSON) for the mlp victim.
    #[arg(long, value_name = "FILE")]
    pub weights: Option<PathBuf>,
    /// CIFAR-10 binary batch the mlp victim is attacked on.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(default, rename_all = "kebab-case")]
pub struct AttackArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub victim: VictimArgs,
    /// `builtin:final`, `builtin:initial`, `boundary`, or a program file.
    #[arg(long)]
    pub program: Option<String>,
    /// Row label in reports; defaults to the program name.
    #[arg(long)]
    pub label: Option<String>,
    /// Queries per image.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub images: Option<usize>,
    /// Success threshold on the l2 distance; `inf` counts every image.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Comma-separated query counts to report at.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<u64>>,
    #[arg(long)]
    pub initial_s: Option<f64>,
    /// Output directory; defaults to `run/<timestamp>-attack`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(default, rename_all = "kebab-case")]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub victim: VictimArgs,
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorChoice>,
    #[arg(long)]
    pub generations: Option<u32>,
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub crossover_prob: Option<f64>,
    #[arg(long)]
    pub mutation_prob: Option<f64>,
    #[arg(long)]
    pub fitness_images: Option<usize>,
    #[arg(long)]
    pub fitness_budget: Option<u64>,
    #[arg(long)]
    pub parse_retries: Option<u32>,
    /// Chat model; overrides `AUTODA_MODEL`.
    #[arg(long)]
    pub model: Option<String>,
    /// Endpoint root; overrides `AUTODA_BASE_URL`.
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Output directory; defaults to `run/<timestamp>`.
    #[arg(long, conflicts_with = "resume")]
    pub out: Option<PathBuf>,
    /// Continue the run stored in this directory.
    #[arg(long, value_name = "DIR")]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(default, rename_all = "kebab-case")]
pub struct ReportArgs {
    /// Report files written by `attack`.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Write the comparison table as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Write the aligned text table.
    #[arg(long, value_name = "FILE")]
    pub text: Option<PathBuf>,
}
