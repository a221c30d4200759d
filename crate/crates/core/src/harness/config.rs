use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::presets::{preset, DatasetPreset};
use crate::data::{
    load_csv, preprocess, synthesize, Dataset, PreprocessPolicy, SynthSpec,
    DEFAULT_VALIDATION_FRACTION,
};
use crate::distance::DistanceMetricKind;
use crate::error::{Error, Result};
use crate::model::{ModelConfig, TrainConfig, DEFAULT_HIDDEN_LAYERS};
use crate::weighting::{WeightScheme, DEFAULT_IDW_EPSILON, DEFAULT_IDW_POWER};

pub const DEFAULT_TEST_FRACTIONS: [f64; 3] = [0.1, 0.5, 0.9];
pub const DEFAULT_RUNS: usize = 5;
pub const WORKERS_ENV: &str = "DISTWEIGHT_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        #[serde(default = "default_missing_markers")]
        missing_markers: Vec<String>,
        policy: PreprocessPolicy,
    },
    Synthetic(SynthSpec),
}

fn default_missing_markers() -> Vec<String> {
    vec![String::new(), "?".to_owned()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "default_hidden")]
    pub hidden_layers: Vec<usize>,
}

fn default_hidden() -> Vec<usize> {
    DEFAULT_HIDDEN_LAYERS.to_vec()
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            hidden_layers: default_hidden(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSpec {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

fn default_lr() -> f64 {
    TrainConfig::default().learning_rate
}

fn default_batch() -> usize {
    TrainConfig::default().batch_size
}

fn default_epochs() -> usize {
    TrainConfig::default().epochs
}

impl Default for TrainingSpec {
    fn default() -> Self {
        Self {
            learning_rate: default_lr(),
            batch_size: default_batch(),
            epochs: default_epochs(),
        }
    }
}

/// One experiment: a dataset, a distance metric, the schemes to compare,
/// and the protocol (test fractions x runs) to compare them under.
///
/// `metric` and `schemes` may be left out when `preset` names a known
/// dataset; they then come from the preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub preset: Option<String>,
    pub dataset: DatasetSource,
    #[serde(default)]
    pub metric: Option<DistanceMetricKind>,
    #[serde(default)]
    pub schemes: Option<Vec<WeightScheme>>,
    #[serde(default)]
    pub normalize_mean_one: bool,
    #[serde(default = "default_fractions")]
    pub test_fractions: Vec<f64>,
    #[serde(default = "default_validation")]
    pub validation_fraction: f64,
    #[serde(default = "default_runs")]
    pub n_runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub training: TrainingSpec,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Parallel cells; `DISTWEIGHT_WORKERS` overrides it.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Fill the `wall_time_s` column; when off it is left empty.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub save_checkpoints: bool,
    /// Directory that relative `dataset.path` and `output_dir` resolve
    /// against; set by [`ExperimentConfig::from_file`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_fractions() -> Vec<f64> {
    DEFAULT_TEST_FRACTIONS.to_vec()
}

fn default_validation() -> f64 {
    DEFAULT_VALIDATION_FRACTION
}

fn default_runs() -> usize {
    DEFAULT_RUNS
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// A config with every default filled in.
    pub fn new(dataset: DatasetSource) -> Self {
        Self {
            name: None,
            preset: None,
            dataset,
            metric: None,
            schemes: None,
            normalize_mean_one: false,
            test_fractions: default_fractions(),
            validation_fraction: default_validation(),
            n_runs: default_runs(),
            base_seed: 0,
            model: ModelSpec::default(),
            training: TrainingSpec::default(),
            output_dir: default_output_dir(),
            workers: None,
            record_wall_time: false,
            save_checkpoints: false,
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(json)
            .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a JSON config; relative paths inside it are taken
    /// relative to the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&json)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn preset(&self) -> Result<Option<&'static DatasetPreset>> {
        match &self.preset {
            None => Ok(None),
            Some(key) => preset(key)
                .map(Some)
                .ok_or_else(|| Error::Config(format!("unknown preset {key:?}"))),
        }
    }

    pub fn metric(&self) -> Result<DistanceMetricKind> {
        if let Some(m) = self.metric {
            return Ok(m);
        }
        self.preset()?
            .map(|p| p.metric)
            .ok_or_else(|| Error::Config("`metric` is required when no preset is given".into()))
    }

    /// Configured schemes, or uniform / exp-decay with the preset's lambda /
    /// IDW(p=2) when a preset is given.
    pub fn schemes(&self) -> Result<Vec<WeightScheme>> {
        if let Some(s) = &self.schemes {
            return Ok(s.clone());
        }
        let p = self
            .preset()?
            .ok_or_else(|| Error::Config("`schemes` is required when no preset is given".into()))?;
        Ok(vec![
            WeightScheme::Uniform,
            WeightScheme::ExpDecay { lambda: p.lambda },
            WeightScheme::InverseDistance {
                p: DEFAULT_IDW_POWER,
                epsilon: DEFAULT_IDW_EPSILON,
            },
        ])
    }

    pub fn dataset_name(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        if let Ok(Some(p)) = self.preset() {
            return p.key.to_owned();
        }
        match &self.dataset {
            DatasetSource::Csv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".to_owned()),
            DatasetSource::Synthetic(_) => "synthetic".to_owned(),
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.base_dir.join(&self.output_dir)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.metric()?;
        let schemes = self.schemes()?;
        if schemes.is_empty() {
            return bad("`schemes` must not be empty".into());
        }
        for s in &schemes {
            s.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.test_fractions.is_empty() {
            return bad("`test_fractions` must not be empty".into());
        }
        if let Some(f) = self
            .test_fractions
            .iter()
            .find(|f| !(**f > 0.0 && **f < 1.0))
        {
            return bad(format!("test fraction {f} must lie in (0, 1)"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!(
                "validation_fraction {} must lie in [0, 1)",
                self.validation_fraction
            ));
        }
        if self.n_runs == 0 {
            return bad("`n_runs` must be at least 1".into());
        }
        if self.model.hidden_layers.contains(&0) {
            return bad("hidden layer widths must be at least 1".into());
        }
        if self.workers == Some(0) {
            return bad("`workers` must be at least 1".into());
        }
        self.train_config(0)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if let DatasetSource::Synthetic(spec) = &self.dataset {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Loads and preprocesses (or synthesizes) the dataset, named after
    /// [`dataset_name`](Self::dataset_name).
    pub fn load_dataset(&self) -> Result<Dataset> {
        let mut ds = match &self.dataset {
            DatasetSource::Csv {
                path,
                missing_markers,
                policy,
            } => {
                let markers: Vec<&str> = missing_markers.iter().map(String::as_str).collect();
                let raw = load_csv(self.base_dir.join(path), &markers)?;
                preprocess(&raw, policy)?
            }
            DatasetSource::Synthetic(spec) => synthesize(spec)?,
        };
        ds.name = self.dataset_name();
        Ok(ds)
    }

    pub fn model_config(&self, input_dim: usize, seed: u64) -> ModelConfig {
        ModelConfig {
            input_dim,
            hidden_layers: self.model.hidden_layers.clone(),
            seed,
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.training.learning_rate,
            batch_size: self.training.batch_size,
            epochs: self.training.epochs,
            shuffle_seed: seed,
        }
    }

    /// Seed for run `run_index`: `base_seed + run_index`.
    pub fn run_seed(&self, run_index: usize) -> u64 {
        self.base_seed.wrapping_add(run_index as u64)
    }

    /// Worker count: the environment override, then `workers`, else `None`
    /// (one per core).
    pub fn worker_count(&self) -> Result<Option<usize>> {
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .map(Some)
                .ok_or_else(|| {
                    Error::Config(format!("{WORKERS_ENV}={v:?} is not a positive integer"))
                }),
            Err(_) => Ok(self.workers),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYNTH: &str = r#""dataset": {"synthetic": {"n_samples": 50, "n_features": 2,
        "class_balance": 0.5, "class_separation": 2.0, "label_noise": 0.0, "seed": 1}}"#;

    #[test]
    fn preset_supplies_metric_and_schemes() {
        let cfg =
            ExperimentConfig::from_json(&format!(r#"{{"preset": "banknote", {SYNTH}}}"#)).unwrap();
        assert_eq!(cfg.metric().unwrap(), DistanceMetricKind::Euclidean);
        assert_eq!(
            cfg.schemes().unwrap(),
            vec![
                WeightScheme::Uniform,
                WeightScheme::ExpDecay { lambda: 0.8 },
                WeightScheme::InverseDistance {
                    p: 2.0,
                    epsilon: 1e-8
                },
            ]
        );
        assert_eq!(cfg.test_fractions, vec![0.1, 0.5, 0.9]);
        assert_eq!(cfg.n_runs, 5);
        assert_eq!(
            cfg.training,
            TrainingSpec {
                learning_rate: 0.001,
                batch_size: 32,
                epochs: 100
            }
        );
        assert_eq!(cfg.model.hidden_layers, vec![64]);
        assert_eq!(cfg.dataset_name(), "banknote");
    }

    #[test]
    fn explicit_fields_override_preset() {
        let cfg = ExperimentConfig::from_json(&format!(
            r#"{{"preset": "banknote", "metric": "cosine",
                "schemes": [{{"scheme": "exp_decay", "lambda": 0.3}}], {SYNTH}}}"#
        ))
        .unwrap();
        assert_eq!(cfg.metric().unwrap(), DistanceMetricKind::Cosine);
        assert_eq!(
            cfg.schemes().unwrap(),
            vec![WeightScheme::ExpDecay { lambda: 0.3 }]
        );
    }

    #[test]
    fn malformed_configs_are_rejected() {
        for bad in [
            format!(r#"{{{SYNTH}}}"#),
            format!(r#"{{"preset": "nope", {SYNTH}}}"#),
            format!(r#"{{"preset": "banknote", "n_runs": 0, {SYNTH}}}"#),
            format!(r#"{{"preset": "banknote", "test_fractions": [], {SYNTH}}}"#),
            format!(r#"{{"preset": "banknote", "test_fractions": [1.0], {SYNTH}}}"#),
            format!(r#"{{"preset": "banknote", "schemes": [], {SYNTH}}}"#),
            format!(r#"{{"preset": "banknote", "unknown_key": 1, {SYNTH}}}"#),
            format!(
                r#"{{"preset": "banknote", "schemes": [{{"scheme": "exp_decay", "lambda": 0}}], {SYNTH}}}"#
            ),
            "not json".to_owned(),
        ] {
            assert!(
                matches!(ExperimentConfig::from_json(&bad), Err(Error::Config(_))),
                "accepted: {bad}"
            );
        }
    }

    #[test]
    fn run_seed_is_base_plus_index() {
        let mut cfg =
            ExperimentConfig::from_json(&format!(r#"{{"preset": "banknote", {SYNTH}}}"#)).unwrap();
        cfg.base_seed = 100;
        assert_eq!(cfg.run_seed(3), 103);
    }
}
