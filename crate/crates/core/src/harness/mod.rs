//! Experiment runner: for every weighting scheme, test fraction and
//! repetition, split, weight, train and score, then tabulate.
//!
//! A run's seed is `base_seed + run_index`; it drives the split, the model
//! initialisation and the minibatch order through separate generator
//! streams (see [`crate::seeding`]). All schemes of a run share one split
//! and one initialisation, so scheme comparisons are paired.

mod config;
mod presets;
mod report;
mod run;

pub use config::{
    DatasetSource, ExperimentConfig, ModelSpec, TrainingSpec, DEFAULT_RUNS, DEFAULT_TEST_FRACTIONS,
    WORKERS_ENV,
};
pub use presets::{preset, DatasetPreset, PRESETS};
pub use report::{
    aggregate_markdown, emit_report, AggregateRow, MeanMetrics, ReportFormat, ReportTable,
    AGGREGATE_FILE, DETAILS_FILE, FAILURES_FILE, MARKDOWN_FILE,
};
pub use run::{
    cell_weights, run_experiment, run_experiment_on, CellRunner, DistanceFn, RunResult, RunStatus,
};
