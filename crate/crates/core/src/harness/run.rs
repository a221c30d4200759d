use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::ReportTable;
use crate::data::{stratified_split, Dataset, DatasetSplit};
use crate::distance::{pairwise_distances, DistanceMatrix, DistanceMetricKind};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::metrics::{evaluate_held_out, EvalReport, DEFAULT_THRESHOLD};
use crate::model::{predict_proba, save_checkpoint, train, ModelParams};
use crate::weighting::{
    compute_weights, normalize_mean_one, WeightScheme, WeightSummary, WeightVector,
};

/// Train-to-test distance function used by a [`CellRunner`].
pub type DistanceFn =
    fn(&FeatureMatrix, &FeatureMatrix, DistanceMetricKind) -> Result<DistanceMatrix>;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed {
        report: EvalReport,
        weights: WeightSummary,
    },
    Failed {
        reason: String,
    },
}

/// Outcome of one (scheme, test fraction, run) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub dataset: String,
    pub scheme: String,
    pub scheme_index: usize,
    pub test_fraction: f64,
    pub fraction_index: usize,
    pub run: usize,
    pub seed: u64,
    /// Only measured when the config asks for it.
    pub wall_time_s: Option<f64>,
    pub status: RunStatus,
}

impl RunResult {
    pub fn report(&self) -> Option<&EvalReport> {
        match &self.status {
            RunStatus::Completed { report, .. } => Some(report),
            RunStatus::Failed { .. } => None,
        }
    }

    pub fn failure(&self) -> Option<&str> {
        match &self.status {
            RunStatus::Failed { reason } => Some(reason),
            RunStatus::Completed { .. } => None,
        }
    }
}

/// Weights for the training part of `split`. `distances` is only read for
/// schemes that need it.
pub fn cell_weights(
    n_train: usize,
    distances: Option<&DistanceMatrix>,
    scheme: WeightScheme,
    normalize: bool,
) -> Result<WeightVector> {
    let w = if scheme.needs_distances() {
        let d = distances.ok_or_else(|| {
            Error::InvalidParameter(format!("scheme {scheme} needs a distance matrix"))
        })?;
        if d.n_train() != n_train {
            return Err(Error::Shape(format!(
                "distance matrix has {} rows for {n_train} training samples",
                d.n_train()
            )));
        }
        compute_weights(d, scheme)?
    } else {
        WeightVector::uniform(n_train)
    };
    if normalize {
        normalize_mean_one(&w)
    } else {
        Ok(w)
    }
}

/// Runs the cells of one experiment against an already loaded dataset.
pub struct CellRunner<'a> {
    cfg: &'a ExperimentConfig,
    dataset: &'a Dataset,
    metric: DistanceMetricKind,
    schemes: Vec<WeightScheme>,
    distance_fn: DistanceFn,
    checkpoint_dir: Option<PathBuf>,
}

impl<'a> CellRunner<'a> {
    pub fn new(cfg: &'a ExperimentConfig, dataset: &'a Dataset) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            dataset,
            metric: cfg.metric()?,
            schemes: cfg.schemes()?,
            distance_fn: pairwise_distances,
            checkpoint_dir: cfg
                .save_checkpoints
                .then(|| cfg.output_path().join("checkpoints")),
        })
    }

    pub fn with_distance_fn(mut self, f: DistanceFn) -> Self {
        self.distance_fn = f;
        self
    }

    pub fn schemes(&self) -> &[WeightScheme] {
        &self.schemes
    }

    /// Every scheme on the split for (`fraction_index`, `run`). All schemes
    /// see the same split, distances and model seed.
    pub fn run_group(&self, fraction_index: usize, run: usize) -> Vec<RunResult> {
        self.run_schemes(
            fraction_index,
            run,
            &(0..self.schemes.len()).collect::<Vec<_>>(),
        )
    }

    pub fn run_cell(&self, scheme_index: usize, fraction_index: usize, run: usize) -> RunResult {
        self.run_schemes(fraction_index, run, &[scheme_index])
            .pop()
            .expect("one scheme requested")
    }

    fn run_schemes(&self, fraction_index: usize, run: usize, which: &[usize]) -> Vec<RunResult> {
        let tf = self.cfg.test_fractions[fraction_index];
        let seed = self.cfg.run_seed(run);
        let timed = self.cfg.record_wall_time;
        let result = |scheme_index: usize, status: RunStatus, secs: f64| RunResult {
            dataset: self.dataset.name.clone(),
            scheme: self.schemes[scheme_index].tag(),
            scheme_index,
            test_fraction: tf,
            fraction_index,
            run,
            seed,
            wall_time_s: timed.then_some(secs),
            status,
        };
        let failed = |e: &Error| RunStatus::Failed {
            reason: e.to_string(),
        };

        let start = Instant::now();
        let split = match stratified_split(self.dataset, tf, self.cfg.validation_fraction, seed) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("{} tf={tf} run={run}: {e}", self.dataset.name);
                let secs = start.elapsed().as_secs_f64();
                return which.iter().map(|&k| result(k, failed(&e), secs)).collect();
            }
        };
        let split_secs = start.elapsed().as_secs_f64();

        let needs_distances = which.iter().any(|&k| self.schemes[k].needs_distances());
        let start = Instant::now();
        let distances = needs_distances.then(|| {
            (self.distance_fn)(
                split.train.distance_view(self.metric),
                split.test_distance_view(self.metric),
                self.metric,
            )
            .map_err(|e| e.to_string())
        });
        let distance_secs = start.elapsed().as_secs_f64();

        which
            .iter()
            .map(|&k| {
                let scheme = self.schemes[k];
                let start = Instant::now();
                let d = match &distances {
                    Some(Ok(d)) => Ok(Some(d)),
                    Some(Err(e)) if scheme.needs_distances() => Err(e.clone()),
                    _ => Ok(None),
                };
                let outcome = d.and_then(|d| {
                    self.evaluate_scheme(&split, d, k, fraction_index, run)
                        .map_err(|e| e.to_string())
                });
                let mut secs = split_secs + start.elapsed().as_secs_f64();
                if scheme.needs_distances() {
                    secs += distance_secs;
                }
                let status = match outcome {
                    Ok((report, weights)) => RunStatus::Completed { report, weights },
                    Err(reason) => {
                        log::warn!(
                            "{} {} tf={tf} run={run}: {reason}",
                            self.dataset.name,
                            scheme.tag()
                        );
                        RunStatus::Failed { reason }
                    }
                };
                result(k, status, secs)
            })
            .collect()
    }

    fn evaluate_scheme(
        &self,
        split: &DatasetSplit,
        distances: Option<&DistanceMatrix>,
        scheme_index: usize,
        fraction_index: usize,
        run: usize,
    ) -> Result<(EvalReport, WeightSummary)> {
        let seed = split.seed;
        let weights = cell_weights(
            split.train.n_samples(),
            distances,
            self.schemes[scheme_index],
            self.cfg.normalize_mean_one,
        )?;
        let (params, _) = train(
            split,
            &weights,
            &self.cfg.model_config(split.train.n_features(), seed),
            &self.cfg.train_config(seed),
        )?;
        self.save(&params, scheme_index, fraction_index, run)?;
        let scores = predict_proba(&params, &split.test_features)?;
        let report = evaluate_held_out(&scores, split.test_labels(), DEFAULT_THRESHOLD)?;
        Ok((report, weights.summary()))
    }

    fn save(
        &self,
        params: &ModelParams,
        scheme_index: usize,
        fraction_index: usize,
        run: usize,
    ) -> Result<()> {
        let Some(dir) = &self.checkpoint_dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let file = dir.join(format!(
            "{}_s{scheme_index}_f{fraction_index}_r{run}.json",
            self.dataset.name
        ));
        save_checkpoint(params, file)
    }
}

/// Loads the dataset once and runs every (scheme, test fraction, run) cell,
/// in parallel over (fraction, run) groups. Rows come back ordered by
/// scheme, then test fraction, then run, whatever the worker count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReportTable> {
    let dataset = cfg.load_dataset()?;
    run_experiment_on(cfg, &dataset)
}

/// [`run_experiment`] on a dataset that is already in memory.
pub fn run_experiment_on(cfg: &ExperimentConfig, dataset: &Dataset) -> Result<ReportTable> {
    let runner = CellRunner::new(cfg, dataset)?;
    log::info!(
        "{}: {} samples, {} features, {} schemes x {} fractions x {} runs",
        dataset.name,
        dataset.n_samples(),
        dataset.n_features(),
        runner.schemes().len(),
        cfg.test_fractions.len(),
        cfg.n_runs
    );
    let groups: Vec<(usize, usize)> = (0..cfg.test_fractions.len())
        .flat_map(|f| (0..cfg.n_runs).map(move |r| (f, r)))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.worker_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut results: Vec<RunResult> = pool.install(|| {
        groups
            .par_iter()
            .flat_map_iter(|&(f, r)| runner.run_group(f, r))
            .collect()
    });
    results.sort_by_key(|r| (r.scheme_index, r.fraction_index, r.run));
    Ok(ReportTable::new(results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SynthSpec;
    use crate::harness::DatasetSource;

    fn config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(DatasetSource::Synthetic(SynthSpec {
            n_samples: 80,
            n_features: 3,
            class_balance: 0.4,
            class_separation: 3.0,
            label_noise: 0.0,
            seed: 5,
        }));
        cfg.metric = Some(DistanceMetricKind::Euclidean);
        cfg.schemes = Some(vec![
            WeightScheme::Uniform,
            WeightScheme::ExpDecay { lambda: 0.8 },
        ]);
        cfg.test_fractions = vec![0.5];
        cfg.n_runs = 2;
        cfg.training.epochs = 5;
        cfg.model.hidden_layers = vec![8];
        cfg
    }

    fn zero_distances(
        train: &FeatureMatrix,
        test: &FeatureMatrix,
        kind: DistanceMetricKind,
    ) -> Result<DistanceMatrix> {
        DistanceMatrix::from_values(
            vec![0.0; train.n_rows() * test.n_rows()],
            train.n_rows(),
            test.n_rows(),
            kind,
        )
    }

    fn failing_distances(
        _: &FeatureMatrix,
        _: &FeatureMatrix,
        _: DistanceMetricKind,
    ) -> Result<DistanceMatrix> {
        Err(Error::NonBinary(0.5))
    }

    #[test]
    fn rows_are_in_canonical_order() {
        let cfg = config();
        let t = run_experiment(&cfg).unwrap();
        let keys: Vec<(usize, usize)> = t
            .results()
            .iter()
            .map(|r| (r.scheme_index, r.run))
            .collect();
        assert_eq!(keys, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(t.results().iter().all(|r| r.wall_time_s.is_none()));
        assert_eq!(t.results()[3].seed, 1);
    }

    #[test]
    fn zero_distances_reproduce_uniform() {
        let cfg = config();
        let ds = cfg.load_dataset().unwrap();
        let runner = CellRunner::new(&cfg, &ds)
            .unwrap()
            .with_distance_fn(zero_distances);
        let uniform = runner.run_cell(0, 0, 0);
        let decayed = runner.run_cell(1, 0, 0);
        assert_eq!(uniform.report(), decayed.report());
    }

    #[test]
    fn distance_failure_only_fails_distance_schemes() {
        let cfg = config();
        let ds = cfg.load_dataset().unwrap();
        let runner = CellRunner::new(&cfg, &ds)
            .unwrap()
            .with_distance_fn(failing_distances);
        let group = runner.run_group(0, 0);
        assert!(group[0].report().is_some());
        assert!(group[1].failure().unwrap().contains("binary"));
    }

    #[test]
    fn infeasible_split_is_reported_not_raised() {
        let mut cfg = config();
        cfg.test_fractions = vec![0.99];
        let t = run_experiment(&cfg).unwrap();
        assert!(t
            .results()
            .iter()
            .all(|r| r.failure().unwrap().contains("infeasible")));
    }

    #[test]
    fn wall_time_recorded_on_request() {
        let mut cfg = config();
        cfg.record_wall_time = true;
        cfg.n_runs = 1;
        let t = run_experiment(&cfg).unwrap();
        assert!(t.results().iter().all(|r| r.wall_time_s.unwrap() >= 0.0));
    }

    #[test]
    fn cell_weights_requires_distances() {
        assert!(cell_weights(3, None, WeightScheme::ExpDecay { lambda: 1.0 }, false).is_err());
        assert_eq!(
            cell_weights(3, None, WeightScheme::Uniform, true)
                .unwrap()
                .as_slice(),
            &[1.0, 1.0, 1.0]
        );
    }
}
