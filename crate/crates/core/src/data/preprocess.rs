use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use super::table::{Column, RawTable};
use super::{check_both_classes, Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericImputation {
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalImputation {
    Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericScaling {
    Zscore,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalEncoding {
    Onehot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousBinarization {
    MedianThreshold,
    None,
}

/// How a [`RawTable`] becomes a [`Dataset`]. Every field is required when
/// deserializing; nothing is filled in at apply time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessPolicy {
    pub label_column: String,
    pub positive_label: String,
    pub categorical_columns: Vec<String>,
    pub numeric_imputation: NumericImputation,
    pub categorical_imputation: CategoricalImputation,
    pub numeric_scaling: NumericScaling,
    pub categorical_encoding: CategoricalEncoding,
    pub continuous_binarization_for_set_metrics: ContinuousBinarization,
}

impl PreprocessPolicy {
    /// All-numeric table, z-scored, median-thresholded binary view.
    pub fn numeric(label_column: impl Into<String>, positive_label: impl Into<String>) -> Self {
        Self {
            label_column: label_column.into(),
            positive_label: positive_label.into(),
            categorical_columns: Vec::new(),
            numeric_imputation: NumericImputation::Median,
            categorical_imputation: CategoricalImputation::Mode,
            numeric_scaling: NumericScaling::Zscore,
            categorical_encoding: CategoricalEncoding::Onehot,
            continuous_binarization_for_set_metrics: ContinuousBinarization::MedianThreshold,
        }
    }
}

/// Imputes, encodes and scales `raw` into a [`Dataset`].
///
/// Scaling statistics and binarization thresholds are taken over the whole
/// table, before any split.
pub fn preprocess(raw: &RawTable, policy: &PreprocessPolicy) -> Result<Dataset> {
    let label_idx = raw
        .column_index(&policy.label_column)
        .ok_or_else(|| Error::MissingColumn(policy.label_column.clone()))?;
    for name in &policy.categorical_columns {
        if name == &policy.label_column {
            return Err(Error::InvalidParameter(format!(
                "label column {name:?} cannot also be a categorical feature"
            )));
        }
        if raw.column_index(name).is_none() {
            return Err(Error::MissingColumn(name.clone()));
        }
    }

    let labels = map_labels(&raw.columns()[label_idx], policy)?;
    check_both_classes(&labels)?;

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut kinds = Vec::new();
    let mut names = Vec::new();

    for (idx, (name, column)) in raw.column_names().iter().zip(raw.columns()).enumerate() {
        if idx == label_idx {
            continue;
        }
        let as_categorical = policy.categorical_columns.contains(name);
        match (column, as_categorical) {
            (Column::Numeric(values), false) => {
                let Some(mut filled) = impute_median(values) else {
                    warn!("dropping column {name:?}: every value is missing");
                    continue;
                };
                if policy.numeric_scaling == NumericScaling::Zscore && !zscore(&mut filled) {
                    warn!("dropping column {name:?}: zero variance");
                    continue;
                }
                columns.push(filled);
                kinds.push(FeatureKind::Continuous);
                names.push(name.clone());
            }
            (Column::Categorical(_), false) => {
                return Err(Error::InvalidParameter(format!(
                    "column {name:?} has non-numeric values but is not listed in categorical_columns"
                )));
            }
            (column, true) => {
                let cells = categorical_cells(column);
                let Some(filled) = impute_mode(&cells) else {
                    warn!("dropping column {name:?}: every value is missing");
                    continue;
                };
                for (category, indicator) in one_hot(&filled) {
                    columns.push(indicator);
                    kinds.push(FeatureKind::BinaryIndicator);
                    names.push(format!("{name}={category}"));
                }
            }
        }
    }

    let n_rows = raw.n_rows();
    let n_cols = columns.len();
    if n_cols == 0 {
        return Err(Error::InvalidValue("no usable feature columns".into()));
    }
    let features = to_row_major(&columns, n_rows)?;

    let binary_view = match policy.continuous_binarization_for_set_metrics {
        ContinuousBinarization::None => None,
        ContinuousBinarization::MedianThreshold => {
            let binarized: Vec<Vec<f64>> = columns
                .iter()
                .zip(&kinds)
                .map(|(col, kind)| match kind {
                    FeatureKind::BinaryIndicator => col.clone(),
                    FeatureKind::Continuous => {
                        let m = median(col);
                        col.iter().map(|&v| if v > m { 1.0 } else { 0.0 }).collect()
                    }
                })
                .collect();
            Some(to_row_major(&binarized, n_rows)?)
        }
    };

    // The caller names the dataset; the table itself carries no name.
    Dataset::new(String::new(), features, labels, kinds, names, binary_view)
}

fn map_labels(column: &Column, policy: &PreprocessPolicy) -> Result<Vec<u8>> {
    let missing = |row| Error::MissingLabel {
        column: policy.label_column.clone(),
        row,
    };
    match column {
        Column::Categorical(cells) => cells
            .iter()
            .enumerate()
            .map(|(row, c)| match c {
                Some(s) => Ok(u8::from(s == &policy.positive_label)),
                None => Err(missing(row)),
            })
            .collect(),
        Column::Numeric(values) => {
            let positive: f64 = policy.positive_label.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!(
                    "label column is numeric but positive_label {:?} is not a number",
                    policy.positive_label
                ))
            })?;
            values
                .iter()
                .enumerate()
                .map(|(row, v)| match v {
                    Some(v) => Ok(u8::from(*v == positive)),
                    None => Err(missing(row)),
                })
                .collect()
        }
    }
}

fn categorical_cells(column: &Column) -> Vec<Option<String>> {
    match column {
        Column::Categorical(cells) => cells.clone(),
        Column::Numeric(values) => values.iter().map(|v| v.map(|v| v.to_string())).collect(),
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn impute_median(values: &[Option<f64>]) -> Option<Vec<f64>> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        return None;
    }
    let fill = median(&present);
    Some(values.iter().map(|v| v.unwrap_or(fill)).collect())
}

/// Most frequent category; ties go to the lexicographically smallest.
fn impute_mode(cells: &[Option<String>]) -> Option<Vec<String>> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for c in cells.iter().flatten() {
        *counts.entry(c.as_str()).or_default() += 1;
    }
    let mut mode: Option<(&str, usize)> = None;
    for (k, n) in counts {
        if mode.map_or(true, |(_, best)| n > best) {
            mode = Some((k, n));
        }
    }
    let (fill, _) = mode?;
    Some(
        cells
            .iter()
            .map(|c| c.clone().unwrap_or_else(|| fill.to_owned()))
            .collect(),
    )
}

/// Indicator columns in sorted category order.
fn one_hot(cells: &[String]) -> Vec<(String, Vec<f64>)> {
    let mut categories: Vec<&String> = cells.iter().collect();
    categories.sort();
    categories.dedup();
    categories
        .into_iter()
        .map(|cat| {
            let indicator = cells
                .iter()
                .map(|c| if c == cat { 1.0 } else { 0.0 })
                .collect();
            (cat.clone(), indicator)
        })
        .collect()
}

/// Standardizes in place with the sample (n-1) standard deviation. Returns
/// false, leaving the column untouched, when the column has no spread.
fn zscore(values: &mut [f64]) -> bool {
    let n = values.len();
    if n < 2 {
        return false;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    if std.is_nan() || std <= 0.0 || std <= mean.abs() * 1e-12 {
        return false;
    }
    for v in values.iter_mut() {
        *v = (*v - mean) / std;
    }
    true
}

fn to_row_major(columns: &[Vec<f64>], n_rows: usize) -> Result<FeatureMatrix> {
    let n_cols = columns.len();
    let mut data = Vec::with_capacity(n_rows * n_cols);
    for r in 0..n_rows {
        data.extend(columns.iter().map(|c| c[r]));
    }
    FeatureMatrix::new(data, n_rows, n_cols)
}
