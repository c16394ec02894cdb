use std::fmt::Write;

use super::{CheckpointStats, EvalReport, ReportError};

/// One row per report; per checkpoint the mean distance, its standard
/// deviation, the median distance and the success rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub checkpoints: Vec<u64>,
    pub rows: Vec<(String, Vec<CheckpointStats>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    Mean,
    Median,
    Asr,
}

impl ComparisonTable {
    pub fn from_reports(reports: &[EvalReport]) -> Result<Self, ReportError> {
        let first = reports.first().ok_or(ReportError::Empty)?;
        for r in &reports[1..] {
            if r.schema_version != first.schema_version {
                return Err(ReportError::SchemaMismatch(format!(
                    "`{}` has schema version {}, `{}` has {}",
                    r.label, r.schema_version, first.label, first.schema_version
                )));
            }
            if r.checkpoints != first.checkpoints {
                return Err(ReportError::SchemaMismatch(format!(
                    "`{}` has checkpoints {:?}, `{}` has {:?}",
                    r.label, r.checkpoints, first.label, first.checkpoints
                )));
            }
            if r.epsilon != first.epsilon {
                return Err(ReportError::SchemaMismatch(format!(
                    "`{}` uses threshold {}, `{}` uses {}",
                    r.label, r.epsilon, first.label, first.epsilon
                )));
            }
        }
        Ok(Self {
            checkpoints: first.checkpoints.clone(),
            rows: reports
                .iter()
                .map(|r| (r.label.clone(), r.stats.clone()))
                .collect(),
        })
    }

    fn value(stats: &CheckpointStats, metric: Metric) -> f64 {
        match metric {
            Metric::Mean => stats.mean,
            Metric::Median => stats.median,
            Metric::Asr => stats.asr,
        }
    }

    /// Whether row `row` holds the best value of `metric` at checkpoint
    /// `col`: the lowest distance or the highest success rate. Ties are
    /// all best.
    fn is_best(&self, row: usize, col: usize, metric: Metric) -> bool {
        let values = self.rows.iter().map(|(_, s)| Self::value(&s[col], metric));
        let best = match metric {
            Metric::Asr => values.fold(f64::NEG_INFINITY, f64::max),
            _ => values.fold(f64::INFINITY, f64::min),
        };
        Self::value(&self.rows[row].1[col], metric) == best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("attack");
        for q in &self.checkpoints {
            let _ = write!(out, ",mean_{q},std_{q},median_{q},asr_{q}");
        }
        out.push('\n');
        for (label, stats) in &self.rows {
            out.push_str(&csv_field(label));
            for s in stats {
                let _ = write!(out, ",{},{},{},{}", s.mean, s.std, s.median, s.asr);
            }
            out.push('\n');
        }
        out
    }

    /// Aligned text table. Best cells per column carry a trailing `*`.
    pub fn to_text(&self) -> String {
        let mut header = vec!["attack".to_string()];
        for q in &self.checkpoints {
            header.push(format!("mean±std@{q}"));
            header.push(format!("median@{q}"));
            header.push(format!("ASR%@{q}"));
        }
        let mut grid = vec![header];
        for (r, (label, stats)) in self.rows.iter().enumerate() {
            let star = |col, metric| {
                if self.is_best(r, col, metric) {
                    "*"
                } else {
                    ""
                }
            };
            let mut line = vec![label.clone()];
            for (c, s) in stats.iter().enumerate() {
                line.push(format!(
                    "{:.4}±{:.4}{}",
                    s.mean,
                    s.std,
                    star(c, Metric::Mean)
                ));
                line.push(format!("{:.4}{}", s.median, star(c, Metric::Median)));
                line.push(format!("{:.1}{}", s.asr, star(c, Metric::Asr)));
            }
            grid.push(line);
        }

        let columns = grid[0].len();
        let widths: Vec<usize> = (0..columns)
            .map(|c| {
                grid.iter()
                    .map(|row| row[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for row in &grid {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, &w))| {
                    let pad = w - cell.chars().count();
                    if c == 0 {
                        format!("{cell}{}", " ".repeat(pad))
                    } else {
                        format!("{}{cell}", " ".repeat(pad))
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
