//! Feed-forward binary classifier trained with a per-sample weighted
//! cross-entropy and Adam.

mod adam;
mod checkpoint;
mod network;
mod train;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON as ADAM_EPSILON};
pub use checkpoint::{
    checkpoint_from_json, checkpoint_to_json, load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT,
};
pub use network::{
    backward, forward, init_params, predict_proba, sigmoid, weighted_bce_loss, DenseLayer,
    ModelConfig, ModelParams, DEFAULT_HIDDEN_LAYERS, PROB_CLIP,
};
pub use train::{fit, train, EpochStats, TrainConfig, TrainHistory};
