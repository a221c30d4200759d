use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::seeding::{stream_rng, SeedStream};

/// Two Gaussian clouds with identity covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n_samples: usize,
    pub n_features: usize,
    /// Probability that a sample belongs to class 1.
    pub class_balance: f64,
    /// Distance between the class means along the first coordinate, in
    /// standard deviations.
    pub class_separation: f64,
    /// Probability of flipping each label after sampling.
    pub label_noise: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_samples < 2 {
            return bad(format!("n_samples {} must be at least 2", self.n_samples));
        }
        if self.n_features == 0 {
            return bad("n_features must be at least 1".into());
        }
        if !(self.class_balance > 0.0 && self.class_balance < 1.0) {
            return bad(format!(
                "class_balance {} must lie in (0, 1)",
                self.class_balance
            ));
        }
        if !(self.class_separation >= 0.0 && self.class_separation.is_finite()) {
            return bad(format!(
                "class_separation {} must be finite and nonnegative",
                self.class_separation
            ));
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return bad(format!(
                "label_noise {} must lie in [0, 0.5)",
                self.label_noise
            ));
        }
        Ok(())
    }
}

/// Samples a dataset from `spec`. Class means sit at `-sep/2` and `+sep/2`
/// on the first axis; class membership and label flips are independent
/// Bernoulli draws.
pub fn synthesize(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, SeedStream::Synth);
    let n = spec.n_samples;
    let f = spec.n_features;
    let mut data = Vec::with_capacity(n * f);
    let mut labels = Vec::with_capacity(n);
    let half = 0.5 * spec.class_separation;
    for _ in 0..n {
        let class = u8::from(rng.random_bool(spec.class_balance));
        for k in 0..f {
            let z: f64 = rng.sample(StandardNormal);
            let shift = match (k, class) {
                (0, 1) => half,
                (0, _) => -half,
                _ => 0.0,
            };
            data.push(z + shift);
        }
        let flip = spec.label_noise > 0.0 && rng.random_bool(spec.label_noise);
        labels.push(if flip { 1 - class } else { class });
    }
    Dataset::new(
        "synthetic",
        FeatureMatrix::new(data, n, f)?,
        labels,
        vec![FeatureKind::Continuous; f],
        (0..f).map(|k| format!("x{k}")).collect(),
        None,
    )
}
