//! JSON dump of trained parameters: layer shapes plus row-major weight and
//! bias arrays, tagged with a format version.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{DenseLayer, ModelParams};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "distweight-mlp/v1";

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    layers: Vec<DenseLayer>,
}

pub fn checkpoint_to_json(params: &ModelParams) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Checkpoint {
        format: CHECKPOINT_FORMAT.to_owned(),
        layers: params.layers.clone(),
    })?)
}

pub fn checkpoint_from_json(json: &str) -> Result<ModelParams> {
    let ck: Checkpoint = serde_json::from_str(json)?;
    if ck.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint(format!(
            "unsupported format {:?}, expected {CHECKPOINT_FORMAT:?}",
            ck.format
        )));
    }
    let params = ModelParams { layers: ck.layers };
    params
        .validate()
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok(params)
}

pub fn save_checkpoint(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, checkpoint_to_json(params)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams> {
    let path = path.as_ref();
    let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_json(&json)
}
