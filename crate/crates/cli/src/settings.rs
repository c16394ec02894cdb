//! Layering of the TOML config file under command-line flags.
//!
//! The file mirrors the flags: `seed` and `jobs` at the top level, one
//! table per subcommand with the long flag names as keys.
//!
//! ```toml
//! seed = 7
//! [evolve]
//! generator = "mock"
//! fitness-budget = 1000
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use clap::CommandFactory;
use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use crate::args::Cli;
use crate::error::CliError;

#[derive(Debug, Default)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    sections: Table,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut table: Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        let mut take_int = |key: &str| -> Result<Option<u64>, String> {
            match table.remove(key) {
                None => Ok(None),
                Some(Value::Integer(v)) if v >= 0 => Ok(Some(v as u64)),
                Some(v) => Err(format!("`{key}` must be a non-negative integer, got {v}")),
            }
        };
        let seed = take_int("seed")?;
        let jobs = take_int("jobs")?.map(|j| j as usize);
        for (name, value) in &table {
            let Some(section) = value.as_table() else {
                return Err(format!("unknown top-level key `{name}`"));
            };
            let known = flag_names(name).ok_or_else(|| format!("unknown section `[{name}]`"))?;
            if let Some(key) = section.keys().find(|k| !known.contains(*k)) {
                return Err(format!("unknown key `{key}` in `[{name}]`"));
            }
        }
        Ok(Self {
            seed,
            jobs,
            sections: table,
        })
    }

    /// Fills every flag of `cli` left unset from the `[section]` table.
    pub fn layer<T: Serialize + DeserializeOwned>(
        &self,
        section: &str,
        cli: &T,
    ) -> Result<T, CliError> {
        let Some(file) = self.sections.get(section).and_then(Value::as_table) else {
            return serde_clone(cli);
        };
        let mut merged = file.clone();
        let given = Table::try_from(cli).map_err(|e| CliError::Config(e.to_string()))?;
        merged.extend(given);
        merged
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("[{section}]: {e}")))
    }
}

fn serde_clone<T: Serialize + DeserializeOwned>(value: &T) -> Result<T, CliError> {
    let table = Table::try_from(value).map_err(|e| CliError::Config(e.to_string()))?;
    table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}

/// Long flag names of a subcommand, which double as config keys.
fn flag_names(subcommand: &str) -> Option<BTreeSet<String>> {
    let cli = Cli::command();
    let sub = cli.find_subcommand(subcommand)?;
    Some(
        sub.get_arguments()
            .filter(|a| !a.is_global_set())
            .map(|a| match a.get_long() {
                Some(long) => long.to_string(),
                None => a.get_id().as_str().replace('_', "-"),
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{AttackArgs, EvolveArgs, VictimKind};

    #[test]
    fn flags_override_the_file() {
        let file = FileConfig::parse(
            "seed = 3\n[attack]\nvictim = \"hyperplane\"\nbudget = 500\nepsilon = inf\ncheckpoints = [10, 20]\n",
        )
        .unwrap();
        assert_eq!(file.seed, Some(3));
        let cli = AttackArgs {
            budget: Some(900),
            ..AttackArgs::default()
        };
        let merged = file.layer("attack", &cli).unwrap();
        assert_eq!(merged.budget, Some(900));
        assert_eq!(merged.victim.victim, Some(VictimKind::Hyperplane));
        assert_eq!(merged.epsilon, Some(f64::INFINITY));
        assert_eq!(merged.checkpoints, Some(vec![10, 20]));
    }

    #[test]
    fn kebab_case_keys() {
        let file = FileConfig::parse("[evolve]\nfitness-budget = 1000\npop = 4\n").unwrap();
        let merged = file.layer("evolve", &EvolveArgs::default()).unwrap();
        assert_eq!(merged.fitness_budget, Some(1000));
        assert_eq!(merged.pop, Some(4));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = FileConfig::parse("[evolve]\nfitness_budget = 1000\n").unwrap_err();
        assert!(err.contains("fitness_budget"), "{err}");
        assert!(FileConfig::parse("[attak]\nbudget = 1\n").is_err());
        assert!(FileConfig::parse("budget = 1\n").is_err());
        assert!(FileConfig::parse("seed = -1\n").is_err());
    }

    #[test]
    fn cli_values_survive_without_a_file() {
        let cli = AttackArgs {
            epsilon: Some(f64::INFINITY),
            ..AttackArgs::default()
        };
        let merged = FileConfig::default().layer("attack", &cli).unwrap();
        assert_eq!(merged.epsilon, Some(f64::INFINITY));
    }
}
