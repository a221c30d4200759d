//! Per-dataset settings for the twelve benchmark datasets.
//!
//! `shape` is the (samples, features) pair listed for each dataset; it is
//! reference information only, since public copies of some of these
//! datasets have different shapes.

use crate::distance::DistanceMetricKind::{self, Cosine, Euclidean, Hamming};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetPreset {
    pub key: &'static str,
    pub display_name: &'static str,
    pub shape: (usize, usize),
    pub imbalanced: bool,
    pub noisy: bool,
    pub lambda: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub metric: DistanceMetricKind,
}

const fn entry(
    key: &'static str,
    display_name: &'static str,
    shape: (usize, usize),
    imbalanced: bool,
    noisy: bool,
    lambda: f64,
    metric: DistanceMetricKind,
) -> DatasetPreset {
    DatasetPreset {
        key,
        display_name,
        shape,
        imbalanced,
        noisy,
        lambda,
        learning_rate: 0.001,
        batch_size: 32,
        epochs: 100,
        metric,
    }
}

pub const PRESETS: [DatasetPreset; 12] = [
    entry(
        "breast_cancer",
        "Breast Cancer Wisconsin",
        (569, 30),
        true,
        false,
        1.0,
        Euclidean,
    ),
    entry(
        "diabetes",
        "Diabetes",
        (768, 8),
        true,
        false,
        0.5,
        Euclidean,
    ),
    entry(
        "heart",
        "Heart Disease",
        (270, 13),
        false,
        false,
        0.8,
        Hamming,
    ),
    entry(
        "mammographic_mass",
        "Mammographic Mass",
        (11183, 6),
        true,
        true,
        1.0,
        Hamming,
    ),
    entry(
        "haberman",
        "Haberman's Survival",
        (155, 19),
        true,
        true,
        0.7,
        Euclidean,
    ),
    entry(
        "banknote",
        "Banknote Authentication",
        (1372, 4),
        false,
        false,
        0.8,
        Euclidean,
    ),
    entry("ilpd", "ILPD", (583, 10), true, false, 0.9, Euclidean),
    entry(
        "statlog",
        "Statlog (Heart)",
        (462, 9),
        true,
        false,
        0.8,
        Hamming,
    ),
    entry(
        "sonar",
        "Sonar, Mines vs. Rocks",
        (208, 60),
        false,
        false,
        0.7,
        Cosine,
    ),
    entry("wilt", "Wilt", (138, 10935), false, false, 0.9, Cosine),
    entry("spambase", "Spambase", (4601, 57), true, false, 0.8, Cosine),
    entry("adult", "Adult", (48842, 14), true, false, 0.8, Hamming),
];

pub fn preset(key: &str) -> Option<&'static DatasetPreset> {
    PRESETS.iter().find(|p| p.key == key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let b = preset("breast_cancer").unwrap();
        assert_eq!((b.lambda, b.metric, b.shape), (1.0, Euclidean, (569, 30)));
        let bank = preset("banknote").unwrap();
        assert_eq!(
            (bank.lambda, bank.metric, bank.shape),
            (0.8, Euclidean, (1372, 4))
        );
        assert_eq!(preset("sonar").unwrap().metric, Cosine);
        assert_eq!(preset("adult").unwrap().metric, Hamming);
        assert!(PRESETS
            .iter()
            .all(|p| p.learning_rate == 0.001 && p.batch_size == 32 && p.epochs == 100));
        assert!(PRESETS.iter().all(|p| p.lambda >= 0.5 && p.lambda <= 1.0));
        assert!(preset("iris").is_none());
    }
}
