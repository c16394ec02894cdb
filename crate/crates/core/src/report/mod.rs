//! Checkpoint metrics over attack traces, trace files, and comparison
//! tables across attack variants.

mod table;
mod trace;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{AttackTrace, TracePoint};

pub use table::ComparisonTable;
pub use trace::{read_trace_csv, write_trace_csv};

pub const DEFAULT_CHECKPOINTS: [u64; 3] = [2500, 5000, 10000];
pub const DEFAULT_EPSILON: f64 = 0.5;
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("reports do not share a schema: {0}")]
    SchemaMismatch(String),
    #[error("no reports to compare")]
    Empty,
    #[error("empty trace for image {0}")]
    EmptyTrace(usize),
    #[error("malformed trace: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed report: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Best distance known after `query` queries: `d_min` at the largest
/// recorded query index not exceeding it. Before the first record this is
/// the first record's distance.
pub fn checkpoint_distance(points: &[TracePoint], query: u64) -> Option<f64> {
    let idx = points.partition_point(|p| p.query_index <= query);
    points.get(idx.saturating_sub(1)).map(|p| p.d_min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: usize,
    pub queries_used: u64,
    pub final_distance: f64,
    /// Distance at each checkpoint, in checkpoint order.
    pub distances: Vec<f64>,
    /// Distance below the threshold at each checkpoint.
    pub success: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub queries: u64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub median: f64,
    /// Percentage of images below the threshold.
    pub asr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    /// Name of the attack variant, used as the row label in tables.
    pub label: String,
    #[serde(with = "maybe_infinite")]
    pub epsilon: f64,
    pub checkpoints: Vec<u64>,
    pub images: Vec<ImageRecord>,
    pub stats: Vec<CheckpointStats>,
    /// Manifest of the run that produced the report, relative to the
    /// report file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

impl EvalReport {
    pub fn from_traces(
        label: &str,
        traces: &[AttackTrace],
        checkpoints: &[u64],
        epsilon: f64,
    ) -> Self {
        let points: Vec<&[TracePoint]> = traces.iter().map(|t| t.points.as_slice()).collect();
        Self::from_points(label, &points, checkpoints, epsilon)
            .expect("attack traces are never empty")
    }

    /// Builds the report from per-image trace records, such as those read
    /// back from trace CSV files.
    pub fn from_points(
        label: &str,
        traces: &[&[TracePoint]],
        checkpoints: &[u64],
        epsilon: f64,
    ) -> Result<Self, ReportError> {
        let mut images = Vec::with_capacity(traces.len());
        for (image_id, points) in traces.iter().enumerate() {
            let last = points.last().ok_or(ReportError::EmptyTrace(image_id))?;
            let distances: Vec<f64> = checkpoints
                .iter()
                .map(|&q| checkpoint_distance(points, q).expect("non-empty"))
                .collect();
            images.push(ImageRecord {
                image_id,
                queries_used: last.query_index,
                final_distance: last.d_min,
                success: distances.iter().map(|&d| d < epsilon).collect(),
                distances,
            });
        }
        let stats = checkpoints
            .iter()
            .enumerate()
            .map(|(i, &queries)| {
                let values: Vec<f64> = images.iter().map(|r| r.distances[i]).collect();
                let wins = images.iter().filter(|r| r.success[i]).count();
                CheckpointStats {
                    queries,
                    mean: mean(&values),
                    std: population_std(&values),
                    median: median(&values),
                    asr: if images.is_empty() {
                        0.0
                    } else {
                        100.0 * wins as f64 / images.len() as f64
                    },
                }
            })
            .collect();
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            label: label.to_string(),
            epsilon,
            checkpoints: checkpoints.to_vec(),
            images,
            stats,
            manifest: None,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ReportError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ReportError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

/// JSON has no infinities; they are written as the strings `"inf"` and
/// `"-inf"`.
mod maybe_infinite {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        match *v {
            f64::INFINITY => s.serialize_str("inf"),
            f64::NEG_INFINITY => s.serialize_str("-inf"),
            v => s.serialize_f64(v),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(de::Error::custom(format!("expected a number, found `{t}`"))),
        }
    }
}

/// Provenance of a run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub code_version: String,
    pub started_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<String>,
}

impl RunManifest {
    pub fn new(
        command: Vec<String>,
        config: serde_json::Value,
        seed: u64,
        started_at: String,
    ) -> Self {
        Self {
            command,
            config,
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at,
            finished_at: None,
        }
    }
}
