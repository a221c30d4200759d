//! Pairwise distances between training and test samples.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetricKind {
    Euclidean,
    Hamming,
    Cosine,
    Jaccard,
}

impl DistanceMetricKind {
    pub const ALL: [DistanceMetricKind; 4] = [
        DistanceMetricKind::Euclidean,
        DistanceMetricKind::Hamming,
        DistanceMetricKind::Cosine,
        DistanceMetricKind::Jaccard,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMetricKind::Euclidean => "euclidean",
            DistanceMetricKind::Hamming => "hamming",
            DistanceMetricKind::Cosine => "cosine",
            DistanceMetricKind::Jaccard => "jaccard",
        }
    }

    /// Hamming and Jaccard compare set membership, so they run on a
    /// dataset's binary view when it has one.
    pub fn prefers_binary_view(self) -> bool {
        matches!(
            self,
            DistanceMetricKind::Hamming | DistanceMetricKind::Jaccard
        )
    }
}

impl fmt::Display for DistanceMetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceMetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistanceMetricKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown distance metric {s:?}")))
    }
}

/// Distance between two feature vectors.
///
/// * Euclidean: `sqrt(sum (a_k - b_k)^2)`
/// * Hamming: fraction of coordinates that differ
/// * Cosine: `1 - a.b / (|a| |b|)`; a zero vector is at distance 1 from any
///   nonzero vector and 0 from another zero vector
/// * Jaccard: `1 - |a and b| / |a or b|` on 0/1 vectors, 0 when both are
///   all-zero
pub fn distance(kind: DistanceMetricKind, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    match kind {
        DistanceMetricKind::Euclidean => Ok(euclidean(a, b)),
        DistanceMetricKind::Hamming => Ok(hamming(a, b)),
        DistanceMetricKind::Cosine => Ok(cosine(a, b)),
        DistanceMetricKind::Jaccard => jaccard(a, b),
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn hamming(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let differing = a.iter().zip(b).filter(|(x, y)| x != y).count();
    differing as f64 / a.len() as f64
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        aa += x * x;
        bb += y * y;
    }
    match (aa == 0.0, bb == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        (false, false) => {
            // sqrt(aa * bb) is exact for a == b, which keeps d(a, a) at 0
            let prod = aa * bb;
            let norm = if prod.is_finite() && prod > 0.0 {
                prod.sqrt()
            } else {
                aa.sqrt() * bb.sqrt()
            };
            (1.0 - dot / norm).clamp(0.0, 2.0)
        }
    }
}

fn jaccard(a: &[f64], b: &[f64]) -> Result<f64> {
    let mut both = 0usize;
    let mut either = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let x = as_bit(x)?;
        let y = as_bit(y)?;
        both += usize::from(x && y);
        either += usize::from(x || y);
    }
    if either == 0 {
        return Ok(0.0);
    }
    Ok(1.0 - both as f64 / either as f64)
}

fn as_bit(v: f64) -> Result<bool> {
    if v == 0.0 {
        Ok(false)
    } else if v == 1.0 {
        Ok(true)
    } else {
        Err(Error::NonBinary(v))
    }
}

/// Train-by-test distance matrix, row-major: `get(i, j)` is the distance
/// from training row `i` to test row `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Vec<f64>,
    metric: DistanceMetricKind,
    n_train: usize,
    n_test: usize,
}

impl DistanceMatrix {
    /// Wraps precomputed distances, checking that every entry is finite and
    /// nonnegative.
    pub fn from_values(
        values: Vec<f64>,
        n_train: usize,
        n_test: usize,
        metric: DistanceMetricKind,
    ) -> Result<Self> {
        if values.len() != n_train * n_test {
            return Err(Error::Shape(format!(
                "{} values for a {n_train}x{n_test} matrix",
                values.len()
            )));
        }
        if let Some((k, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::NonFinite {
                value: v,
                location: format!("distance ({}, {})", k / n_test.max(1), k % n_test.max(1)),
            });
        }
        Ok(Self {
            values,
            metric,
            n_train,
            n_test,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], metric: DistanceMetricKind) -> Result<Self> {
        let m = FeatureMatrix::from_rows(rows)?;
        let (n, k) = (m.n_rows(), m.n_cols());
        Self::from_values(m.as_slice().to_vec(), n, k, metric)
    }

    /// An `n_train x 0` matrix, enough to size uniform weights.
    pub fn placeholder(n_train: usize, metric: DistanceMetricKind) -> Self {
        Self {
            values: Vec::new(),
            metric,
            n_train,
            n_test: 0,
        }
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn n_test(&self) -> usize {
        self.n_test
    }

    pub fn metric(&self) -> DistanceMetricKind {
        self.metric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_test + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_test..(i + 1) * self.n_test]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// All train-to-test distances. Rows are filled in parallel; each entry is
/// exactly `distance(kind, train_i, test_j)`.
pub fn pairwise_distances(
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    kind: DistanceMetricKind,
) -> Result<DistanceMatrix> {
    if train.n_cols() != test.n_cols() {
        return Err(Error::Shape(format!(
            "train has {} features, test has {}",
            train.n_cols(),
            test.n_cols()
        )));
    }
    let n = train.n_rows();
    let m = test.n_rows();
    let mut values = vec![0.0; n * m];
    if m > 0 {
        values
            .par_chunks_mut(m)
            .enumerate()
            .try_for_each(|(i, out)| -> Result<()> {
                let a = train.row(i);
                for (j, slot) in out.iter_mut().enumerate() {
                    *slot = distance(kind, a, test.row(j))?;
                }
                Ok(())
            })?;
    }
    Ok(DistanceMatrix {
        values,
        metric: kind,
        n_train: n,
        n_test: m,
    })
}
