//! Per-sample loss weights from train-to-test distances.
//!
//! Each training sample gets the average of a distance kernel over every
//! test sample:
//!
//! ```text
//! w_i = (1/M) * sum_j k(D[i][j])
//! ```
//!
//! with `k(d) = exp(-lambda * d)` for exponential decay and
//! `k(d) = 1 / (d^p + epsilon)` for the inverse-distance baseline. Samples
//! near the bulk of the test set end up with larger weights.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_IDW_POWER: f64 = 2.0;
pub const DEFAULT_IDW_EPSILON: f64 = 1e-8;

/// How distances turn into weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightScheme {
    /// Every sample weighs 1; the unweighted baseline.
    Uniform,
    ExpDecay {
        lambda: f64,
    },
    #[serde(rename = "idw")]
    InverseDistance {
        p: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

fn default_epsilon() -> f64 {
    DEFAULT_IDW_EPSILON
}

impl WeightScheme {
    pub fn exp_decay(lambda: f64) -> Result<Self> {
        let s = WeightScheme::ExpDecay { lambda };
        s.validate()?;
        Ok(s)
    }

    pub fn inverse_distance(p: f64, epsilon: f64) -> Result<Self> {
        let s = WeightScheme::InverseDistance { p, epsilon };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        match *self {
            WeightScheme::Uniform => Ok(()),
            WeightScheme::ExpDecay { lambda } => positive("lambda", lambda),
            WeightScheme::InverseDistance { p, epsilon } => {
                positive("p", p)?;
                positive("epsilon", epsilon)
            }
        }
    }

    pub fn needs_distances(&self) -> bool {
        !matches!(self, WeightScheme::Uniform)
    }

    /// Short label used in reports, free of commas.
    pub fn tag(&self) -> String {
        match *self {
            WeightScheme::Uniform => "uniform".to_owned(),
            WeightScheme::ExpDecay { lambda } => format!("exp_decay[lambda={lambda}]"),
            WeightScheme::InverseDistance { p, epsilon } => {
                format!("idw[p={p};epsilon={epsilon:e}]")
            }
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// One weight per training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    scheme: WeightScheme,
    normalized: bool,
}

impl WeightVector {
    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0; n],
            scheme: WeightScheme::Uniform,
            normalized: false,
        }
    }

    /// Wraps caller-supplied weights, which must be finite and positive.
    pub fn from_values(weights: Vec<f64>, scheme: WeightScheme) -> Result<Self> {
        check_positive(&weights)?;
        Ok(Self {
            weights,
            scheme,
            normalized: false,
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn summary(&self) -> WeightSummary {
        let n = self.weights.len().max(1) as f64;
        WeightSummary {
            min: self.weights.iter().copied().fold(f64::INFINITY, f64::min),
            mean: self.weights.iter().sum::<f64>() / n,
            max: self
                .weights
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

fn check_positive(weights: &[f64]) -> Result<()> {
    for (index, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFinite {
                value: w,
                location: format!("weight {index}"),
            });
        }
        if w <= 0.0 {
            return Err(Error::WeightUnderflow { index });
        }
    }
    Ok(())
}

/// Averages the scheme's kernel over every test sample for each training
/// row. The sum over test samples runs in index order.
pub fn compute_weights(d: &DistanceMatrix, scheme: WeightScheme) -> Result<WeightVector> {
    scheme.validate()?;
    let n = d.n_train();
    let m = d.n_test();
    if scheme == WeightScheme::Uniform {
        return Ok(WeightVector::uniform(n));
    }
    if n == 0 || m == 0 {
        return Err(Error::Shape(format!(
            "distance matrix is {n}x{m}; weighting needs at least one train and one test sample"
        )));
    }
    if let Some((k, &v)) = d
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::NonFinite {
            value: v,
            location: format!("distance ({}, {})", k / m, k % m),
        });
    }

    let kernel: Box<dyn Fn(f64) -> f64> = match scheme {
        WeightScheme::ExpDecay { lambda } => Box::new(move |dist: f64| (-lambda * dist).exp()),
        WeightScheme::InverseDistance { p, epsilon } => {
            Box::new(move |dist: f64| 1.0 / (dist.powf(p) + epsilon))
        }
        WeightScheme::Uniform => unreachable!(),
    };
    let weights: Vec<f64> = (0..n)
        .map(|i| d.row(i).iter().map(|&dist| kernel(dist)).sum::<f64>() / m as f64)
        .collect();
    check_positive(&weights)?;
    Ok(WeightVector {
        weights,
        scheme,
        normalized: false,
    })
}

/// Rescales weights by `N / sum(w)` so that they average to one.
pub fn normalize_mean_one(w: &WeightVector) -> Result<WeightVector> {
    let n = w.len();
    let sum: f64 = w.weights.iter().sum();
    let mean = sum / n.max(1) as f64;
    if n == 0 || !mean.is_finite() || mean < 1e-300 {
        return Err(Error::DegenerateWeights(mean));
    }
    let scale = n as f64 / sum;
    let weights: Vec<f64> = w.weights.iter().map(|v| v * scale).collect();
    check_positive(&weights)?;
    Ok(WeightVector {
        weights,
        scheme: w.scheme,
        normalized: true,
    })
}
