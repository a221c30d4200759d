use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::seeding::{stream_rng, SeedStream};

pub const DEFAULT_HIDDEN_LAYERS: [usize; 1] = [64];

/// Probabilities are clipped to `[PROB_CLIP, 1 - PROB_CLIP]` inside the loss.
pub const PROB_CLIP: f64 = 1e-12;

/// Feed-forward classifier shape: ReLU hidden layers and one sigmoid output.
/// Hidden layers use He-uniform initialization, the output layer
/// Glorot-uniform; biases start at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(input_dim: usize, seed: u64) -> Self {
        Self {
            input_dim,
            hidden_layers: DEFAULT_HIDDEN_LAYERS.to_vec(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidParameter(
                "input_dim must be at least 1".into(),
            ));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::InvalidParameter(
                "hidden layer widths must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Fully connected layer; `weights` is `n_out x n_in`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            biases: vec![0.0; n_out],
        }
    }

    pub fn weight(&self, out: usize, input: usize) -> f64 {
        self.weights[out * self.n_in + input]
    }

    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (o, row) in self.weights.chunks_exact(self.n_in).enumerate() {
            let mut z = self.biases[o];
            for (w, x) in row.iter().zip(input) {
                z += w * x;
            }
            out.push(z);
        }
    }
}

/// Layer weights and biases of the classifier. Also used for gradients and
/// optimizer moments, which share the parameter shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub layers: Vec<DenseLayer>,
}

impl ModelParams {
    pub fn zeros_like(other: &ModelParams) -> Self {
        Self {
            layers: other
                .layers
                .iter()
                .map(|l| DenseLayer::zeros(l.n_in, l.n_out))
                .collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.n_in)
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Every parameter in a fixed order: each layer's weights, then its
    /// biases.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    /// The `k`th parameter in [`values`](Self::values) order.
    pub fn value_mut(&mut self, k: usize) -> &mut f64 {
        self.values_mut()
            .nth(k)
            .expect("parameter index out of range")
    }

    pub fn all_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    fn check_shapes(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Shape("model has no layers".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.n_in * l.n_out || l.biases.len() != l.n_out {
                return Err(Error::Shape(format!(
                    "layer {i} buffers do not match its shape"
                )));
            }
            if i > 0 && self.layers[i - 1].n_out != l.n_in {
                return Err(Error::Shape(format!(
                    "layer {i} expects {} inputs, previous layer has {} outputs",
                    l.n_in,
                    self.layers[i - 1].n_out
                )));
            }
        }
        if self.layers.last().map(|l| l.n_out) != Some(1) {
            return Err(Error::Shape(
                "output layer must have exactly one unit".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        self.check_shapes()?;
        if !self.all_finite() {
            return Err(Error::NonFinite {
                value: self
                    .values()
                    .copied()
                    .find(|v| !v.is_finite())
                    .unwrap_or(f64::NAN),
                location: "model parameters".into(),
            });
        }
        Ok(())
    }
}

pub fn init_params(cfg: &ModelConfig) -> Result<ModelParams> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, SeedStream::Init);
    let mut layers = Vec::with_capacity(cfg.hidden_layers.len() + 1);
    let mut fan_in = cfg.input_dim;
    for &width in &cfg.hidden_layers {
        let bound = (6.0 / fan_in as f64).sqrt();
        layers.push(uniform_layer(&mut rng, fan_in, width, bound));
        fan_in = width;
    }
    let bound = (6.0 / (fan_in + 1) as f64).sqrt();
    layers.push(uniform_layer(&mut rng, fan_in, 1, bound));
    Ok(ModelParams { layers })
}

fn uniform_layer(rng: &mut impl Rng, n_in: usize, n_out: usize, bound: f64) -> DenseLayer {
    DenseLayer {
        n_in,
        n_out,
        weights: (0..n_in * n_out)
            .map(|_| rng.random_range(-bound..=bound))
            .collect(),
        biases: vec![0.0; n_out],
    }
}

/// Logistic function evaluated on the branch that cannot overflow, kept
/// strictly inside (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Pre-activations and activations of one sample, layer by layer.
pub(crate) struct Trace {
    /// `activations[0]` is the input; `activations[l + 1]` is the output of
    /// layer `l` (post-ReLU for hidden layers).
    pub activations: Vec<Vec<f64>>,
    pub pre_activations: Vec<Vec<f64>>,
    pub prob: f64,
}

impl ModelParams {
    pub(crate) fn trace(&self, x: &[f64]) -> Trace {
        let n = self.layers.len();
        let mut activations = Vec::with_capacity(n + 1);
        let mut pre_activations = Vec::with_capacity(n);
        activations.push(x.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.n_out);
            layer.affine(&activations[l], &mut z);
            let a = if l + 1 < n {
                z.iter().map(|&v| v.max(0.0)).collect()
            } else {
                z.clone()
            };
            pre_activations.push(z);
            activations.push(a);
        }
        let prob = sigmoid(pre_activations[n - 1][0]);
        Trace {
            activations,
            pre_activations,
            prob,
        }
    }

    fn prob_row(&self, x: &[f64], a: &mut Vec<f64>, b: &mut Vec<f64>) -> f64 {
        let n = self.layers.len();
        a.clear();
        a.extend_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            layer.affine(a, b);
            if l + 1 < n {
                for v in b.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            std::mem::swap(a, b);
        }
        sigmoid(a[0])
    }
}

/// Class-1 probability for every row of `x`. Rows are independent: a row
/// gives the same output alone or inside any batch.
pub fn forward(params: &ModelParams, x: &FeatureMatrix) -> Result<Vec<f64>> {
    params.check_shapes()?;
    if x.n_cols() != params.input_dim() {
        return Err(Error::Shape(format!(
            "input has {} features, model expects {}",
            x.n_cols(),
            params.input_dim()
        )));
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    Ok(x.rows()
        .map(|row| params.prob_row(row, &mut a, &mut b))
        .collect())
}

pub fn predict_proba(params: &ModelParams, x: &FeatureMatrix) -> Result<Vec<f64>> {
    forward(params, x)
}

fn sample_bce(p: f64, y: u8) -> f64 {
    let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// `(1/N) * sum_i w_i * BCE(y_i, p_i)`.
pub fn weighted_bce_loss(probs: &[f64], labels: &[u8], weights: &[f64]) -> Result<f64> {
    if probs.len() != labels.len() || probs.len() != weights.len() {
        return Err(Error::Shape(format!(
            "{} probabilities, {} labels, {} weights",
            probs.len(),
            labels.len(),
            weights.len()
        )));
    }
    if probs.is_empty() {
        return Err(Error::Empty);
    }
    let total: f64 = probs
        .iter()
        .zip(labels)
        .zip(weights)
        .map(|((&p, &y), &w)| w * sample_bce(p, y))
        .sum();
    Ok(total / probs.len() as f64)
}

/// Gradients of the batch loss `(1/B) * sum_i w_i * BCE_i` with respect to
/// every parameter, together with the loss itself.
pub fn backward(
    params: &ModelParams,
    x: &FeatureMatrix,
    y: &[u8],
    w: &[f64],
) -> Result<(f64, ModelParams)> {
    params.check_shapes()?;
    let b = x.n_rows();
    if y.len() != b || w.len() != b {
        return Err(Error::Shape(format!(
            "batch of {b} rows with {} labels and {} weights",
            y.len(),
            w.len()
        )));
    }
    if x.n_cols() != params.input_dim() {
        return Err(Error::Shape(format!(
            "input has {} features, model expects {}",
            x.n_cols(),
            params.input_dim()
        )));
    }
    if b == 0 {
        return Err(Error::Empty);
    }

    let inv_b = 1.0 / b as f64;
    let mut grads = ModelParams::zeros_like(params);
    let mut loss = 0.0;
    let n_layers = params.layers.len();

    for ((row, &yi), &wi) in x.rows().zip(y).zip(w) {
        let trace = params.trace(row);
        loss += wi * sample_bce(trace.prob, yi);

        // dL/dz of the sigmoid output under cross-entropy is (p - y).
        let mut delta = vec![wi * inv_b * (trace.prob - f64::from(yi))];
        for l in (0..n_layers).rev() {
            let layer = &params.layers[l];
            let input = &trace.activations[l];
            let g = &mut grads.layers[l];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let grow = &mut g.weights[o * layer.n_in..(o + 1) * layer.n_in];
                for (gw, &a) in grow.iter_mut().zip(input) {
                    *gw += d * a;
                }
                g.biases[o] += d;
            }
            if l == 0 {
                break;
            }
            let below = &trace.pre_activations[l - 1];
            let mut next = vec![0.0; layer.n_in];
            for (k, slot) in next.iter_mut().enumerate() {
                if below[k] <= 0.0 {
                    continue;
                }
                let mut s = 0.0;
                for (o, &d) in delta.iter().enumerate() {
                    s += layer.weight(o, k) * d;
                }
                *slot = s;
            }
            delta = next;
        }
    }
    Ok((loss * inv_b, grads))
}
