//! Tabular input: CSV loading, preprocessing, stratified splitting and
//! synthetic datasets.

mod preprocess;
mod split;
mod synth;
mod table;

pub use preprocess::{
    preprocess, CategoricalEncoding, CategoricalImputation, ContinuousBinarization,
    NumericImputation, NumericScaling, PreprocessPolicy,
};
pub use split::{stratified_split, DatasetSplit, DEFAULT_VALIDATION_FRACTION};
pub use synth::{synthesize, SynthSpec};
pub use table::{load_csv, Column, RawTable};

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMetricKind;
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    BinaryIndicator,
}

/// Preprocessed samples with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: FeatureMatrix,
    pub labels: Vec<u8>,
    pub feature_kinds: Vec<FeatureKind>,
    pub feature_names: Vec<String>,
    /// 0/1 view of `features` for set-style metrics, when the policy asked
    /// for one. Continuous features are thresholded at their median.
    pub binary_view: Option<FeatureMatrix>,
}

impl Dataset {
    /// Validates the dataset invariants: finite features, 0/1 labels with
    /// both classes present, one kind and one name per feature.
    pub fn new(
        name: impl Into<String>,
        features: FeatureMatrix,
        labels: Vec<u8>,
        feature_kinds: Vec<FeatureKind>,
        feature_names: Vec<String>,
        binary_view: Option<FeatureMatrix>,
    ) -> Result<Self> {
        if labels.len() != features.n_rows() {
            return Err(Error::Shape(format!(
                "{} labels for {} rows",
                labels.len(),
                features.n_rows()
            )));
        }
        if feature_kinds.len() != features.n_cols() || feature_names.len() != features.n_cols() {
            return Err(Error::Shape(format!(
                "{} kinds and {} names for {} features",
                feature_kinds.len(),
                feature_names.len(),
                features.n_cols()
            )));
        }
        if let Some(bv) = &binary_view {
            if bv.n_rows() != features.n_rows() || bv.n_cols() != features.n_cols() {
                return Err(Error::Shape(
                    "binary view shape differs from features".into(),
                ));
            }
        }
        if let Some((i, v)) = features
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite())
        {
            return Err(Error::NonFinite {
                value: *v,
                location: format!(
                    "row {} column {}",
                    i / features.n_cols().max(1),
                    i % features.n_cols().max(1)
                ),
            });
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidValue(format!("label {bad} is not 0 or 1")));
        }
        check_both_classes(&labels)?;
        Ok(Self {
            name: name.into(),
            features,
            labels,
            feature_kinds,
            feature_names,
            binary_view,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    /// Number of samples labelled 1.
    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// The representation distances should be computed on: the binary view
    /// for Hamming and Jaccard when one exists, the features otherwise.
    pub fn distance_view(&self, metric: DistanceMetricKind) -> &FeatureMatrix {
        match (&self.binary_view, metric.prefers_binary_view()) {
            (Some(bv), true) => bv,
            _ => &self.features,
        }
    }

    /// Row subset. Class balance is not re-checked, so a small validation
    /// part may legitimately hold a single class.
    pub(crate) fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_kinds: self.feature_kinds.clone(),
            feature_names: self.feature_names.clone(),
            binary_view: self.binary_view.as_ref().map(|b| b.select_rows(indices)),
        }
    }
}

pub(crate) fn check_both_classes(labels: &[u8]) -> Result<()> {
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 {
        return Err(Error::SingleClass(0));
    }
    if positives == labels.len() {
        return Err(Error::SingleClass(1));
    }
    Ok(())
}
