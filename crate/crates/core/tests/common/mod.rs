//! Plain-loop reference implementations used as test oracles.

#![allow(dead_code)]

use distweight::matrix::FeatureMatrix;
use distweight::model::{forward, weighted_bce_loss, ModelParams};
use rand::Rng;

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s += (a[k] - b[k]) * (a[k] - b[k]);
    }
    s.sqrt()
}

pub fn hamming(a: &[f64], b: &[f64]) -> f64 {
    let mut diff = 0;
    for k in 0..a.len() {
        if a[k] != b[k] {
            diff += 1;
        }
    }
    diff as f64 / a.len() as f64
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for k in 0..a.len() {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    match (aa == 0.0, bb == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => 1.0 - ab / (aa.sqrt() * bb.sqrt()),
    }
}

pub fn jaccard(a: &[f64], b: &[f64]) -> f64 {
    let (mut both, mut either) = (0, 0);
    for k in 0..a.len() {
        let (x, y) = (a[k] == 1.0, b[k] == 1.0);
        if x && y {
            both += 1;
        }
        if x || y {
            either += 1;
        }
    }
    if either == 0 {
        0.0
    } else {
        1.0 - both as f64 / either as f64
    }
}

/// w_i = (1/M) * sum_j exp(-lambda * d_ij)
pub fn exp_decay_weights(d: &[Vec<f64>], lambda: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for row in d {
        let mut s = 0.0;
        for &dij in row {
            s += (-lambda * dij).exp();
        }
        out.push(s / row.len() as f64);
    }
    out
}

/// w_i = (1/M) * sum_j 1 / (d_ij^p + epsilon)
pub fn idw_weights(d: &[Vec<f64>], p: f64, epsilon: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for row in d {
        let mut s = 0.0;
        for &dij in row {
            s += 1.0 / (dij.powf(p) + epsilon);
        }
        out.push(s / row.len() as f64);
    }
    out
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counting
/// one half.
pub fn auc_pairs(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut good, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    good += 1.0;
                } else if scores[i] == scores[j] {
                    good += 0.5;
                }
            }
        }
    }
    good / pairs
}

pub fn random_matrix(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    lo: f64,
    hi: f64,
) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

pub fn to_matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
    FeatureMatrix::from_rows(rows).unwrap()
}

/// Central difference of the batch loss with respect to parameter `k`.
pub fn numeric_gradient(
    params: &ModelParams,
    x: &FeatureMatrix,
    y: &[u8],
    w: &[f64],
    k: usize,
    h: f64,
) -> f64 {
    let loss = |p: &ModelParams| weighted_bce_loss(&forward(p, x).unwrap(), y, w).unwrap();
    let mut plus = params.clone();
    *plus.value_mut(k) += h;
    let mut minus = params.clone();
    *minus.value_mut(k) -= h;
    (loss(&plus) - loss(&minus)) / (2.0 * h)
}

/// |a - n| / max(|a|, |n|, floor)
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}
