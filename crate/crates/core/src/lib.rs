//! Distance-based sample weighting for tabular binary classification.
//!
//! Training samples are weighted by how close they sit to the (unlabelled)
//! test features, and the weights scale each sample's cross-entropy term
//! while a small MLP trains with Adam. The crate also carries the pieces
//! needed to benchmark that idea end to end: CSV ingestion and
//! preprocessing, stratified splits, four distance metrics, the usual
//! binary-classification metrics and a seeded experiment harness.
//!
//! ```
//! use distweight::distance::{pairwise_distances, DistanceMetricKind};
//! use distweight::matrix::FeatureMatrix;
//! use distweight::weighting::{compute_weights, WeightScheme};
//!
//! let train = FeatureMatrix::from_rows(&[[0.0], [-2.0]]).unwrap();
//! let test = FeatureMatrix::from_rows(&[[0.0], [1.0]]).unwrap();
//! let d = pairwise_distances(&train, &test, DistanceMetricKind::Euclidean).unwrap();
//! let w = compute_weights(&d, WeightScheme::exp_decay(1.0).unwrap()).unwrap();
//! assert!(w.as_slice()[0] > w.as_slice()[1]);
//! ```
//!
//! The guide under `book/` walks through each stage; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod data;
pub mod distance;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod seeding;
pub mod weighting;

pub use error::{Error, Result};

// Book chapters, run by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/distances.md")]
    mod distances {}
    #[doc = include_str!("../../../book/src/weighting.md")]
    mod weighting {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
