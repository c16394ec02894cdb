use autoda_core::dsl::DslError;
use autoda_core::evolution::EvolutionError;
use autoda_core::report::ReportError;
use autoda_core::victims::VictimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Program { path: String, source: DslError },
    #[error("{0}")]
    Victim(String),
    #[error("generator unavailable: {0}")]
    GeneratorUnavailable(String),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Evolution(EvolutionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Program { .. } => 2,
            CliError::Report(ReportError::SchemaMismatch(_) | ReportError::Json(_)) => 2,
            CliError::Victim(_) => 3,
            CliError::GeneratorUnavailable(_) => 4,
            CliError::Evolution(EvolutionError::InvalidConfig(_)) => 2,
            CliError::Evolution(EvolutionError::NoInstances) => 3,
            _ => 1,
        }
    }
}

impl From<VictimError> for CliError {
    fn from(e: VictimError) -> Self {
        CliError::Victim(e.to_string())
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::GeneratorUnavailable { source, .. } => {
                CliError::GeneratorUnavailable(source.to_string())
            }
            e => CliError::Evolution(e),
        }
    }
}
