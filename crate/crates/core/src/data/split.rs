use rand::seq::SliceRandom;

use super::Dataset;
use crate::distance::DistanceMetricKind;
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::metrics::HeldOutLabels;
use crate::seeding::{stream_rng, SeedStream};

/// Share of the non-test rows that goes to validation.
pub const DEFAULT_VALIDATION_FRACTION: f64 = 0.2;

/// A stratified train / validation / test partition.
///
/// Test labels are wrapped in [`HeldOutLabels`], which only the metrics
/// module can read.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Dataset,
    pub validation: Dataset,
    pub test_features: FeatureMatrix,
    pub test_binary_view: Option<FeatureMatrix>,
    test_labels: HeldOutLabels,
    pub test_fraction: f64,
    pub validation_fraction: f64,
    pub seed: u64,
    /// Source row indices of each part, ascending.
    pub train_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl DatasetSplit {
    pub fn test_labels(&self) -> &HeldOutLabels {
        &self.test_labels
    }

    /// Swaps in other test labels, e.g. to check that nothing upstream of
    /// evaluation depends on them.
    pub fn with_test_labels(mut self, labels: HeldOutLabels) -> Result<Self> {
        if labels.len() != self.n_test() {
            return Err(Error::Shape(format!(
                "{} labels for {} test rows",
                labels.len(),
                self.n_test()
            )));
        }
        self.test_labels = labels;
        Ok(self)
    }

    pub fn n_test(&self) -> usize {
        self.test_features.n_rows()
    }

    /// Test-side counterpart of [`Dataset::distance_view`].
    pub fn test_distance_view(&self, metric: DistanceMetricKind) -> &FeatureMatrix {
        match (&self.test_binary_view, metric.prefers_binary_view()) {
            (Some(bv), true) => bv,
            _ => &self.test_features,
        }
    }
}

/// Splits `ds` per class: `round(n_c * test_fraction)` rows of each class go
/// to test, `round(rest_c * validation_fraction)` of the remainder to
/// validation, the rest to train.
pub fn stratified_split(
    ds: &Dataset,
    test_fraction: f64,
    validation_fraction: f64,
    seed: u64,
) -> Result<DatasetSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_fraction {test_fraction} must lie in (0, 1)"
        )));
    }
    if !(0.0..1.0).contains(&validation_fraction) {
        return Err(Error::InvalidParameter(format!(
            "validation_fraction {validation_fraction} must lie in [0, 1)"
        )));
    }

    let mut rng = stream_rng(seed, SeedStream::Split);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();

    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..ds.n_samples())
            .filter(|&i| ds.labels[i] == class)
            .collect();
        idx.shuffle(&mut rng);
        let n = idx.len();
        let n_test = (n as f64 * test_fraction).round() as usize;
        let n_val = ((n - n_test) as f64 * validation_fraction).round() as usize;
        let n_train = n - n_test - n_val;
        if n_train < 2 {
            return Err(Error::InfeasibleSplit(format!(
                "class {class} has {n} samples; test fraction {test_fraction} and validation \
                 fraction {validation_fraction} leave {n_train} for training (need 2)"
            )));
        }
        test.extend_from_slice(&idx[..n_test]);
        validation.extend_from_slice(&idx[n_test..n_test + n_val]);
        train.extend_from_slice(&idx[n_test + n_val..]);
    }
    if test.is_empty() {
        return Err(Error::InfeasibleSplit(format!(
            "test fraction {test_fraction} leaves the test set empty"
        )));
    }
    train.sort_unstable();
    validation.sort_unstable();
    test.sort_unstable();

    Ok(DatasetSplit {
        train: ds.subset(&train),
        validation: ds.subset(&validation),
        test_features: ds.features.select_rows(&test),
        test_binary_view: ds.binary_view.as_ref().map(|b| b.select_rows(&test)),
        test_labels: HeldOutLabels::new(test.iter().map(|&i| ds.labels[i]).collect()),
        test_fraction,
        validation_fraction,
        seed,
        train_indices: train,
        validation_indices: validation,
        test_indices: test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureKind;

    fn dataset(n: usize, n_pos: usize) -> Dataset {
        let rows: Vec<[f64; 1]> = (0..n).map(|i| [i as f64]).collect();
        let labels = (0..n).map(|i| u8::from(i < n_pos)).collect();
        Dataset::new(
            "d",
            FeatureMatrix::from_rows(&rows).unwrap(),
            labels,
            vec![FeatureKind::Continuous],
            vec!["x".into()],
            None,
        )
        .unwrap()
    }

    fn positives(ds: &Dataset, idx: &[usize]) -> usize {
        idx.iter().filter(|&&i| ds.labels[i] == 1).count()
    }

    #[test]
    fn hundred_samples_half_test() {
        let ds = dataset(100, 30);
        let s = stratified_split(&ds, 0.5, 0.2, 1).unwrap();
        assert_eq!(s.test_indices.len(), 50);
        assert_eq!(s.validation_indices.len(), 10);
        assert_eq!(s.train_indices.len(), 40);
        assert!(positives(&ds, &s.test_indices).abs_diff(15) <= 1);
        assert_eq!(s.n_test(), 50);
        assert_eq!(s.train.n_samples(), 40);
    }

    #[test]
    fn partition_is_disjoint_and_exhaustive() {
        let ds = dataset(97, 23);
        let s = stratified_split(&ds, 0.3, 0.2, 9).unwrap();
        let mut all: Vec<usize> = s
            .train_indices
            .iter()
            .chain(&s.validation_indices)
            .chain(&s.test_indices)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..97).collect::<Vec<_>>());
    }

    #[test]
    fn same_seed_same_partition() {
        let ds = dataset(100, 30);
        let a = stratified_split(&ds, 0.5, 0.2, 17).unwrap();
        let b = stratified_split(&ds, 0.5, 0.2, 17).unwrap();
        assert_eq!(a.train_indices, b.train_indices);
        assert_eq!(a.validation_indices, b.validation_indices);
        assert_eq!(a.test_indices, b.test_indices);
        let c = stratified_split(&ds, 0.5, 0.2, 18).unwrap();
        assert_ne!(a.test_indices, c.test_indices);
    }

    #[test]
    fn infeasible_when_train_loses_a_class() {
        // 2 positives at test fraction 0.9: round(1.8) = 2 go to test.
        let ds = dataset(20, 2);
        assert!(matches!(
            stratified_split(&ds, 0.9, 0.2, 0),
            Err(Error::InfeasibleSplit(_))
        ));
    }

    #[test]
    fn rejects_out_of_range_fractions() {
        let ds = dataset(20, 10);
        assert!(stratified_split(&ds, 0.0, 0.2, 0).is_err());
        assert!(stratified_split(&ds, 1.0, 0.2, 0).is_err());
        assert!(stratified_split(&ds, 0.5, 1.0, 0).is_err());
        assert!(stratified_split(&ds, 0.5, -0.1, 0).is_err());
    }
}
