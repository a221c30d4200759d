use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::network::{backward, forward, init_params, weighted_bce_loss, ModelConfig, ModelParams};
use crate::data::{Dataset, DatasetSplit};
use crate::error::{Error, Result};
use crate::metrics::DEFAULT_THRESHOLD;
use crate::seeding::{stream_rng, SeedStream};
use crate::weighting::WeightVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 100,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter(
                "batch_size must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// Weighted loss over the whole training set after the epoch.
    pub train_loss: f64,
    /// Unweighted loss and accuracy on the validation part; absent when the
    /// validation part is empty.
    pub validation_loss: Option<f64>,
    pub validation_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
}

/// Trains on `split.train` with per-sample `weights`, monitoring
/// `split.validation`. Never touches the test part.
pub fn train(
    split: &DatasetSplit,
    weights: &WeightVector,
    mcfg: &ModelConfig,
    tcfg: &TrainConfig,
) -> Result<(ModelParams, TrainHistory)> {
    fit(
        &split.train,
        Some(&split.validation),
        weights,
        mcfg,
        tcfg,
        |_, _| {},
    )
}

/// Minibatch Adam over a fixed number of epochs.
///
/// Each epoch reshuffles the training rows from a generator seeded once with
/// `tcfg.shuffle_seed`; a sample's weight travels with it. `on_step` sees the
/// parameters after every optimizer step (1-based step count).
pub fn fit(
    train: &Dataset,
    validation: Option<&Dataset>,
    weights: &WeightVector,
    mcfg: &ModelConfig,
    tcfg: &TrainConfig,
    mut on_step: impl FnMut(u64, &ModelParams),
) -> Result<(ModelParams, TrainHistory)> {
    tcfg.validate()?;
    let n = train.n_samples();
    if weights.len() != n {
        return Err(Error::Shape(format!(
            "{} weights for {n} training samples",
            weights.len()
        )));
    }
    if mcfg.input_dim != train.n_features() {
        return Err(Error::Shape(format!(
            "model input_dim {} but data has {} features",
            mcfg.input_dim,
            train.n_features()
        )));
    }
    if n == 0 {
        return Err(Error::Empty);
    }

    let mut params = init_params(mcfg)?;
    let mut adam = AdamState::new(&params);
    let mut rng = stream_rng(tcfg.shuffle_seed, SeedStream::Shuffle);
    let mut order: Vec<usize> = (0..n).collect();
    let w = weights.as_slice();
    let mut history = TrainHistory::default();

    for _ in 0..tcfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(tcfg.batch_size) {
            let x = train.features.select_rows(batch);
            let y: Vec<u8> = batch.iter().map(|&i| train.labels[i]).collect();
            let wb: Vec<f64> = batch.iter().map(|&i| w[i]).collect();
            let (_, grads) = backward(&params, &x, &y, &wb)?;
            adam_step(&mut params, &grads, &mut adam, tcfg.learning_rate)?;
            on_step(adam.t, &params);
        }
        history
            .epochs
            .push(epoch_stats(&params, train, validation, w)?);
    }
    params.validate()?;
    Ok((params, history))
}

fn epoch_stats(
    params: &ModelParams,
    train: &Dataset,
    validation: Option<&Dataset>,
    w: &[f64],
) -> Result<EpochStats> {
    let probs = forward(params, &train.features)?;
    let train_loss = weighted_bce_loss(&probs, &train.labels, w)?;
    let (validation_loss, validation_accuracy) = match validation {
        Some(v) if v.n_samples() > 0 => {
            let probs = forward(params, &v.features)?;
            let ones = vec![1.0; probs.len()];
            let loss = weighted_bce_loss(&probs, &v.labels, &ones)?;
            let correct = probs
                .iter()
                .zip(&v.labels)
                .filter(|(&p, &y)| u8::from(p >= DEFAULT_THRESHOLD) == y)
                .count();
            (Some(loss), Some(correct as f64 / probs.len() as f64))
        }
        _ => (None, None),
    };
    Ok(EpochStats {
        train_loss,
        validation_loss,
        validation_accuracy,
    })
}
