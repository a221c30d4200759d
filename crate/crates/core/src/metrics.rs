//! Binary-classification metrics: confusion counts, precision, recall, F1,
//! accuracy and Mann-Whitney ROC AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Test-set labels. Only this module can read them, so nothing upstream of
/// evaluation (weighting, training) can depend on them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeldOutLabels(Vec<u8>);

impl HeldOutLabels {
    pub fn new(labels: Vec<u8>) -> Self {
        Self(labels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Predicts positive when `score >= threshold`.
pub fn confusion_at_threshold(
    scores: &[f64],
    labels: &[u8],
    threshold: f64,
) -> Result<ConfusionCounts> {
    check_lengths(scores, labels)?;
    let mut c = ConfusionCounts::default();
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Precision, recall, F1 and accuracy. Every 0/0 ratio is reported as 0.
pub fn precision_recall_f1_accuracy(c: &ConfusionCounts) -> Result<ThresholdMetrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Empty);
    }
    let tp = c.tp as f64;
    let precision = ratio(tp, (c.tp + c.fp) as f64);
    let recall = ratio(tp, (c.tp + c.fn_) as f64);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    let accuracy = (c.tp + c.tn) as f64 / total as f64;
    Ok(ThresholdMetrics {
        precision,
        recall,
        f1,
        accuracy,
    })
}

/// ROC AUC as the normalized Mann-Whitney U statistic, using average ranks
/// for tied scores. Equivalent to the fraction of positive/negative pairs
/// ordered correctly, with ties counting one half.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_lengths(scores, labels)?;
    if let Some(&s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::NonFinite {
            value: s,
            location: "score".into(),
        });
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of 1-based ranks of the positives, ties sharing their mean rank.
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let mean_rank = (start + 1 + end) as f64 / 2.0;
        let pos_in_group = order[start..end]
            .iter()
            .filter(|&&i| labels[i] == 1)
            .count();
        rank_sum_pos += mean_rank * pos_in_group as f64;
        start = end;
    }
    let n_pos_f = n_pos as f64;
    let u = rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0;
    Ok(u / (n_pos_f * n_neg as f64))
}

/// All five metrics for one evaluated model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub accuracy: f64,
    pub threshold: f64,
    pub n_test: usize,
}

pub fn evaluate(scores: &[f64], labels: &[u8], threshold: f64) -> Result<EvalReport> {
    if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::InvalidValue(format!("label {bad} is not 0 or 1")));
    }
    let counts = confusion_at_threshold(scores, labels, threshold)?;
    let m = precision_recall_f1_accuracy(&counts)?;
    let auc = roc_auc(scores, labels)?;
    Ok(EvalReport {
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        auc,
        accuracy: m.accuracy,
        threshold,
        n_test: labels.len(),
    })
}

/// [`evaluate`] against held-out test labels.
pub fn evaluate_held_out(
    scores: &[f64],
    labels: &HeldOutLabels,
    threshold: f64,
) -> Result<EvalReport> {
    evaluate(scores, &labels.0, threshold)
}

fn check_lengths(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    Ok(())
}
