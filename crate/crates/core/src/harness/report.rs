use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::RunResult;
use crate::error::{Error, Result};

pub const DETAILS_FILE: &str = "details.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const FAILURES_FILE: &str = "failures.csv";
pub const MARKDOWN_FILE: &str = "aggregate.md";

const METRIC_COLUMNS: [&str; 6] = [
    "precision",
    "recall",
    "auc",
    "f1",
    "accuracy",
    "wall_time_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// `details.csv`, `aggregate.csv` and, if any cell failed, `failures.csv`.
    Csv,
    /// `aggregate.md`.
    Markdown,
}

/// Arithmetic means over the completed runs of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanMetrics {
    pub precision: f64,
    pub recall: f64,
    pub auc: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub dataset: String,
    pub scheme: String,
    pub test_fraction: f64,
    /// Completed runs behind `means`.
    pub n_runs: usize,
    pub n_failed: usize,
    /// `None` when every run failed.
    pub means: Option<MeanMetrics>,
}

/// Per-run results in canonical order (scheme, test fraction, run).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportTable {
    results: Vec<RunResult>,
}

impl ReportTable {
    pub fn new(results: Vec<RunResult>) -> Self {
        Self { results }
    }

    pub fn results(&self) -> &[RunResult] {
        &self.results
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunResult> {
        self.results.iter().filter(|r| r.failure().is_some())
    }

    /// Results of one scheme at one test fraction, in run order.
    pub fn cell(&self, scheme: &str, test_fraction: f64) -> Vec<&RunResult> {
        self.results
            .iter()
            .filter(|r| r.scheme == scheme && r.test_fraction == test_fraction)
            .collect()
    }

    /// One row per (dataset, scheme, test fraction), in first-seen order.
    pub fn aggregate(&self) -> Vec<AggregateRow> {
        let mut keys: Vec<(&str, &str, f64)> = Vec::new();
        for r in &self.results {
            let k = (r.dataset.as_str(), r.scheme.as_str(), r.test_fraction);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(dataset, scheme, tf)| {
                let group: Vec<&RunResult> = self
                    .results
                    .iter()
                    .filter(|r| r.dataset == dataset && r.scheme == scheme && r.test_fraction == tf)
                    .collect();
                let done: Vec<&RunResult> = group
                    .iter()
                    .copied()
                    .filter(|r| r.report().is_some())
                    .collect();
                AggregateRow {
                    dataset: dataset.to_owned(),
                    scheme: scheme.to_owned(),
                    test_fraction: tf,
                    n_runs: done.len(),
                    n_failed: group.len() - done.len(),
                    means: mean_metrics(&done),
                }
            })
            .collect()
    }
}

fn mean_metrics(done: &[&RunResult]) -> Option<MeanMetrics> {
    if done.is_empty() {
        return None;
    }
    let n = done.len() as f64;
    let mean = |f: &dyn Fn(&RunResult) -> f64| done.iter().map(|r| f(r)).sum::<f64>() / n;
    let report = |r: &RunResult| *r.report().expect("completed run");
    let wall_time_s = done
        .iter()
        .map(|r| r.wall_time_s)
        .sum::<Option<f64>>()
        .map(|s| s / n);
    Some(MeanMetrics {
        precision: mean(&|r| report(r).precision),
        recall: mean(&|r| report(r).recall),
        auc: mean(&|r| report(r).auc),
        f1: mean(&|r| report(r).f1),
        accuracy: mean(&|r| report(r).accuracy),
        wall_time_s,
    })
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn details_csv(table: &ReportTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dataset", "scheme", "test_fraction", "run", "seed"];
    header.extend(METRIC_COLUMNS);
    w.write_record(&header).map_err(csv_err)?;
    for r in table.results() {
        let mut rec = vec![
            r.dataset.clone(),
            r.scheme.clone(),
            fmt(r.test_fraction),
            r.run.to_string(),
            r.seed.to_string(),
        ];
        match r.report() {
            Some(m) => rec.extend([m.precision, m.recall, m.auc, m.f1, m.accuracy].map(fmt)),
            None => rec.extend(std::iter::repeat(String::new()).take(5)),
        }
        rec.push(fmt_opt(r.wall_time_s));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| csv_err(e.into_error()))
}

fn aggregate_csv(rows: &[AggregateRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["dataset", "scheme", "test_fraction", "n_runs"];
    header.extend(METRIC_COLUMNS);
    w.write_record(&header).map_err(csv_err)?;
    for a in rows {
        let mut rec = vec![
            a.dataset.clone(),
            a.scheme.clone(),
            fmt(a.test_fraction),
            a.n_runs.to_string(),
        ];
        match &a.means {
            Some(m) => {
                rec.extend([m.precision, m.recall, m.auc, m.f1, m.accuracy].map(fmt));
                rec.push(fmt_opt(m.wall_time_s));
            }
            None => rec.extend(std::iter::repeat(String::new()).take(6)),
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| csv_err(e.into_error()))
}

fn failures_csv(table: &ReportTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset",
        "scheme",
        "test_fraction",
        "run",
        "seed",
        "reason",
    ])
    .map_err(csv_err)?;
    for r in table.failures() {
        w.write_record([
            r.dataset.clone(),
            r.scheme.clone(),
            fmt(r.test_fraction),
            r.run.to_string(),
            r.seed.to_string(),
            r.failure().unwrap_or_default().to_owned(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| csv_err(e.into_error()))
}

/// Aggregate table as GitHub-flavoured markdown, metrics to four places.
pub fn aggregate_markdown(rows: &[AggregateRow]) -> String {
    let mut out = String::from(
        "| Dataset | Test Size | Model | Precision | Recall | AUC | F1 | Accuracy | Runs |\n\
         |---|---|---|---|---|---|---|---|---|\n",
    );
    for a in rows {
        let cells = match &a.means {
            Some(m) => [m.precision, m.recall, m.auc, m.f1, m.accuracy].map(|v| format!("{v:.4}")),
            None => std::array::from_fn(|_| "n/a".to_owned()),
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            a.dataset,
            a.test_fraction,
            a.scheme,
            cells.join(" | "),
            a.n_runs
        ));
    }
    out
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Csv {
        path: PathBuf::from("<report>"),
        message: e.to_string(),
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes `table` into `dir` (created if missing) and returns the files
/// written. An empty table is an error and leaves the file system untouched.
pub fn emit_report(table: &ReportTable, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
    if table.is_empty() {
        return Err(Error::Empty);
    }
    let rows = table.aggregate();
    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    match format {
        ReportFormat::Csv => {
            files.push((DETAILS_FILE, details_csv(table)?));
            files.push((AGGREGATE_FILE, aggregate_csv(&rows)?));
            if table.failures().next().is_some() {
                files.push((FAILURES_FILE, failures_csv(table)?));
            }
        }
        ReportFormat::Markdown => {
            files.push((MARKDOWN_FILE, aggregate_markdown(&rows).into_bytes()))
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        write(dir, name, &bytes, &mut written)?;
    }
    Ok(written)
}
