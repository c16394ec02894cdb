//! Run directory:
//!
//! ```text
//! <root>/config.json
//! <root>/population.index          one line per completed generation
//! <root>/gen_<k>/population.index  member ids in rank order
//! <root>/gen_<k>/cand_<id>.gen     program text
//! <root>/gen_<k>/cand_<id>.meta    fitness, parents, diagnostics (JSON)
//! ```
//!
//! A generation counts as complete once its line is in the root index,
//! which is written after the generation directory.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Candidate, EvolutionConfig, EvolutionError, Fitness, Population};
use crate::dsl::parse;

const INDEX: &str = "population.index";
const CONFIG: &str = "config.json";

#[derive(Debug, Serialize, Deserialize)]
struct CandidateMeta {
    id: u64,
    generation_born: u32,
    parent_ids: Vec<u64>,
    fitness: Fitness,
}

/// One line of the root index.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSummary {
    pub generation: u32,
    pub best: Option<f64>,
    pub mean: Option<f64>,
    pub failed: usize,
    pub members: Vec<u64>,
}

impl GenerationSummary {
    pub fn of(pop: &Population) -> Self {
        Self {
            generation: pop.generation,
            best: pop.best_fitness(),
            mean: pop.mean_fitness(),
            failed: pop.failed_count(),
            members: pop.members.iter().map(Candidate::id).collect(),
        }
    }

    fn to_line(&self) -> String {
        let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        let members: Vec<String> = self.members.iter().map(u64::to_string).collect();
        format!(
            "generation={} best={} mean={} failed={} members={}",
            self.generation,
            num(self.best),
            num(self.mean),
            self.failed,
            members.join(",")
        )
    }

    fn from_line(line: &str) -> Option<Self> {
        let mut summary = GenerationSummary {
            generation: 0,
            best: None,
            mean: None,
            failed: 0,
            members: Vec::new(),
        };
        let num = |v: &str| {
            if v == "-" {
                Ok(None)
            } else {
                v.parse().map(Some)
            }
        };
        for field in line.split_whitespace() {
            let (key, value) = field.split_once('=')?;
            match key {
                "generation" => summary.generation = value.parse().ok()?,
                "best" => summary.best = num(value).ok()?,
                "mean" => summary.mean = num(value).ok()?,
                "failed" => summary.failed = value.parse().ok()?,
                "members" if !value.is_empty() => {
                    summary.members = value
                        .split(',')
                        .map(str::parse)
                        .collect::<Result<_, _>>()
                        .ok()?
                }
                "members" => {}
                _ => return None,
            }
        }
        Some(summary)
    }
}

#[derive(Debug, Clone)]
pub struct RunStore {
    root: PathBuf,
}

impl RunStore {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, EvolutionError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    /// Opens an existing run directory.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, EvolutionError> {
        let root = root.into();
        if !root.join(CONFIG).is_file() {
            return Err(EvolutionError::Store(format!(
                "{} is not a run directory (no {CONFIG})",
                root.display()
            )));
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn generation_dir(&self, generation: u32) -> PathBuf {
        self.root.join(format!("gen_{generation}"))
    }

    pub fn write_config(&self, config: &EvolutionConfig) -> Result<(), EvolutionError> {
        self.write_json(CONFIG, config)
    }

    /// Writes `value` as pretty JSON to `<root>/<name>`.
    pub fn write_json<T: Serialize + ?Sized>(
        &self,
        name: &str,
        value: &T,
    ) -> Result<(), EvolutionError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| EvolutionError::Store(e.to_string()))?;
        text.push('\n');
        fs::write(self.root.join(name), text)?;
        Ok(())
    }

    /// Writes one generation, then records it in the root index.
    /// Generation 0 starts a fresh index.
    pub fn write_generation(&self, pop: &Population) -> Result<(), EvolutionError> {
        let dir = self.generation_dir(pop.generation);
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::create_dir_all(&dir)?;

        let mut index = String::new();
        for c in &pop.members {
            fs::write(dir.join(format!("cand_{}.gen", c.id())), c.source())?;
            let meta = CandidateMeta {
                id: c.id(),
                generation_born: c.generation_born(),
                parent_ids: c.parent_ids().to_vec(),
                fitness: c.fitness().clone(),
            };
            let mut json = serde_json::to_string_pretty(&meta)
                .map_err(|e| EvolutionError::Store(e.to_string()))?;
            json.push('\n');
            fs::write(dir.join(format!("cand_{}.meta", c.id())), json)?;
            let fitness = c
                .fitness()
                .value()
                .map_or_else(|| "failed".to_string(), |v| v.to_string());
            let _ = writeln!(index, "{} {}", c.id(), fitness);
        }
        fs::write(dir.join(INDEX), index)?;

        let mut root_index = fs::OpenOptions::new()
            .create(true)
            .write(true)
            .append(pop.generation != 0)
            .truncate(pop.generation == 0)
            .open(self.root.join(INDEX))?;
        writeln!(root_index, "{}", GenerationSummary::of(pop).to_line())?;
        Ok(())
    }

    /// Summaries of the completed generations, in order.
    pub fn summaries(&self) -> Result<Vec<GenerationSummary>, EvolutionError> {
        let path = self.root.join(INDEX);
        if !path.exists() {
            return Ok(Vec::new());
        }
        fs::read_to_string(&path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, line)| {
                GenerationSummary::from_line(line)
                    .filter(|s| s.generation as usize == i)
                    .ok_or_else(|| {
                        EvolutionError::Store(format!("{}: bad line {}", path.display(), i + 1))
                    })
            })
            .collect()
    }

    /// Loads the configuration and every completed generation.
    pub fn load(&self) -> Result<(EvolutionConfig, Vec<Population>), EvolutionError> {
        let config: EvolutionConfig =
            serde_json::from_str(&fs::read_to_string(self.root.join(CONFIG))?)
                .map_err(|e| EvolutionError::Store(format!("{CONFIG}: {e}")))?;
        let mut history = Vec::new();
        for summary in self.summaries()? {
            let dir = self.generation_dir(summary.generation);
            let mut members = Vec::with_capacity(summary.members.len());
            for id in &summary.members {
                let source = fs::read_to_string(dir.join(format!("cand_{id}.gen")))?;
                let meta: CandidateMeta =
                    serde_json::from_str(&fs::read_to_string(dir.join(format!("cand_{id}.meta")))?)
                        .map_err(|e| EvolutionError::Store(format!("cand_{id}.meta: {e}")))?;
                let program = parse(&source).ok().map(Arc::new);
                members.push(Candidate::restored(
                    meta.id,
                    source,
                    program,
                    meta.fitness,
                    meta.parent_ids,
                    meta.generation_born,
                ));
            }
            history.push(Population::ranked(summary.generation, members));
        }
        Ok((config, history))
    }
}
