//! Small fully-connected ReLU/softmax network with hand-written forward
//! and backward passes, plus the loss pieces of the regional-smoothness
//! objective and a checkpoint format.
//!
//! Everything is f64 and single-example; batching is a loop at the call
//! site, which is the right trade at the network sizes this crate trains
//! (two hidden layers of 64 on 2-D inputs).

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{NcgError, Result};
use crate::linalg;

/// Probability floor inside every logarithm.
pub const PROB_CLAMP: f64 = 1e-12;

/// Fully-connected network: ReLU on hidden layers, raw logits at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct MLPModel {
    /// Layer widths `[d, h₁, …, C]`.
    pub widths: Vec<usize>,
    /// Row-major `out × in` weight matrix per layer.
    pub weights: Vec<Vec<f64>>,
    /// Bias vector per layer.
    pub biases: Vec<Vec<f64>>,
}

/// Cached forward pass: `activations[0]` is the input, each following
/// entry is a layer's post-activation output, and the last entry holds the
/// logits.
#[derive(Debug, Clone, Default)]
pub struct Forward {
    pub activations: Vec<Vec<f64>>,
}

impl Forward {
    /// Logits of the cached pass.
    pub fn logits(&self) -> &[f64] {
        self.activations.last().expect("forward pass not run")
    }
}

/// Parameter gradients shaped like a model.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl MLPModel {
    /// He-initialized network: weights `N(0, √(2/fan_in))`, biases zero.
    pub fn new(widths: &[usize], rng: &mut ChaCha8Rng) -> Result<Self> {
        if widths.len() < 2 {
            return Err(NcgError::InvalidParameter {
                name: "widths",
                why: "need at least input and output widths".into(),
            });
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(NcgError::InvalidParameter {
                name: "widths",
                why: "zero-width layer".into(),
            });
        }
        let normal = StandardNormal;
        let mut weights = Vec::with_capacity(widths.len() - 1);
        let mut biases = Vec::with_capacity(widths.len() - 1);
        for layer in 0..widths.len() - 1 {
            let fan_in = widths[layer];
            let fan_out = widths[layer + 1];
            let scale = (2.0 / fan_in as f64).sqrt();
            let mut w = Vec::with_capacity(fan_in * fan_out);
            for _ in 0..fan_in * fan_out {
                let g: f64 = normal.sample(rng);
                w.push(scale * g);
            }
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Ok(Self {
            widths: widths.to_vec(),
            weights,
            biases,
        })
    }

    /// Input dimension `d`.
    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    /// Output dimension `C`.
    pub fn class_count(&self) -> usize {
        *self.widths.last().unwrap()
    }

    fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    /// Runs the network, reusing `fwd`'s buffers.
    pub fn forward_into(&self, x: &[f64], fwd: &mut Forward) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(NcgError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        linalg::check_finite(x)?;
        let layers = self.layer_count();
        fwd.activations.resize(layers + 1, Vec::new());
        fwd.activations[0].clear();
        fwd.activations[0].extend_from_slice(x);
        for layer in 0..layers {
            let fan_in = self.widths[layer];
            let fan_out = self.widths[layer + 1];
            let (before, after) = fwd.activations.split_at_mut(layer + 1);
            let input = &before[layer];
            let out = &mut after[0];
            out.clear();
            out.reserve(fan_out);
            let w = &self.weights[layer];
            let b = &self.biases[layer];
            let last = layer == layers - 1;
            for o in 0..fan_out {
                let row = &w[o * fan_in..(o + 1) * fan_in];
                let z = linalg::dot(row, input) + b[o];
                out.push(if last { z } else { z.max(0.0) });
            }
        }
        Ok(())
    }

    /// Runs the network into a fresh buffer.
    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        let mut fwd = Forward::default();
        self.forward_into(x, &mut fwd)?;
        Ok(fwd)
    }

    /// Logits and softmax probabilities at `x`.
    pub fn probs(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let fwd = self.forward(x)?;
        let logits = fwd.logits().to_vec();
        let probs = softmax(&logits);
        Ok((logits, probs))
    }

    /// Argmax class at `x`, ties to the smallest index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let fwd = self.forward(x)?;
        Ok(argmax(fwd.logits()))
    }

    /// Accumulates parameter gradients for a cached pass whose logit
    /// gradient is `dz`, and returns nothing; `backprop_input` walks the
    /// same chain down to the input instead.
    pub fn backprop_params(&self, fwd: &Forward, dz: &[f64], grads: &mut Gradients) {
        let mut delta = dz.to_vec();
        for layer in (0..self.layer_count()).rev() {
            let fan_in = self.widths[layer];
            let input = &fwd.activations[layer];
            let gw = &mut grads.weights[layer];
            for (o, &dout) in delta.iter().enumerate() {
                let row = &mut gw[o * fan_in..(o + 1) * fan_in];
                for (gi, &ai) in row.iter_mut().zip(input) {
                    *gi += dout * ai;
                }
            }
            for (gb, &dout) in grads.biases[layer].iter_mut().zip(&delta) {
                *gb += dout;
            }
            if layer > 0 {
                delta = self.push_delta_down(layer, &delta, &fwd.activations[layer]);
            }
        }
    }

    /// Gradient of the same scalar with respect to the input point.
    pub fn backprop_input(&self, fwd: &Forward, dz: &[f64]) -> Vec<f64> {
        let mut delta = dz.to_vec();
        for layer in (1..self.layer_count()).rev() {
            delta = self.push_delta_down(layer, &delta, &fwd.activations[layer]);
        }
        // Through the first layer with no activation mask: d/dx = W₀ᵀ δ.
        let fan_in = self.widths[0];
        let w = &self.weights[0];
        let mut dx = vec![0.0; fan_in];
        for (o, &dout) in delta.iter().enumerate() {
            let row = &w[o * fan_in..(o + 1) * fan_in];
            for (g, &wi) in dx.iter_mut().zip(row) {
                *g += dout * wi;
            }
        }
        dx
    }

    /// Backpropagates `delta` through layer `layer`'s weights and the ReLU
    /// that produced `activation` (the layer's input).
    fn push_delta_down(&self, layer: usize, delta: &[f64], activation: &[f64]) -> Vec<f64> {
        let fan_in = self.widths[layer];
        let w = &self.weights[layer];
        let mut down = vec![0.0; fan_in];
        for (o, &dout) in delta.iter().enumerate() {
            let row = &w[o * fan_in..(o + 1) * fan_in];
            for (g, &wi) in down.iter_mut().zip(row) {
                *g += dout * wi;
            }
        }
        for (g, &a) in down.iter_mut().zip(activation) {
            if a <= 0.0 {
                *g = 0.0;
            }
        }
        down
    }
}

impl Gradients {
    /// Zero gradients shaped like `model`.
    pub fn zeros_like(model: &MLPModel) -> Self {
        Self {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Resets to zero in place.
    pub fn clear(&mut self) {
        for w in &mut self.weights {
            w.iter_mut().for_each(|v| *v = 0.0);
        }
        for b in &mut self.biases {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

/// Max-stabilized softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the largest value, smallest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Cross-entropy `−log(max(probs[y], 1e−12))`.
pub fn cross_entropy(probs: &[f64], y: usize) -> Result<f64> {
    if y >= probs.len() {
        return Err(NcgError::LabelOutOfRange {
            label: y as i64,
            class_count: probs.len(),
        });
    }
    Ok(-probs[y].max(PROB_CLAMP).ln())
}

/// KL divergence `Σ p log(p/q)` with both arguments clamped at 1e−12
/// inside the logarithm. Natural log.
pub fn kl_div(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(NcgError::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(p.iter()
        .zip(q)
        .map(|(&pc, &qc)| pc * (pc.max(PROB_CLAMP) / qc.max(PROB_CLAMP)).ln())
        .sum())
}

/// Logit gradient of cross-entropy: `softmax(z) − onehot(y)`.
pub fn ce_logit_grad(probs: &[f64], y: usize) -> Vec<f64> {
    let mut dz = probs.to_vec();
    dz[y] -= 1.0;
    dz
}

/// Logit gradient of `KL(p′‖q)` with respect to the perturbed branch's
/// logits: `p′_c · (log(p′_c/q_c) − KL)`.
pub fn kl_logit_grad_perturbed(p_prime: &[f64], q: &[f64]) -> Vec<f64> {
    let kl: f64 = p_prime
        .iter()
        .zip(q)
        .map(|(&pc, &qc)| pc * (pc.max(PROB_CLAMP) / qc.max(PROB_CLAMP)).ln())
        .sum();
    p_prime
        .iter()
        .zip(q)
        .map(|(&pc, &qc)| pc * ((pc.max(PROB_CLAMP) / qc.max(PROB_CLAMP)).ln() - kl))
        .collect()
}

/// Logit gradient of `KL(p′‖q)` with respect to the anchor branch's
/// logits: `q − p′`.
pub fn kl_logit_grad_anchor(p_prime: &[f64], q: &[f64]) -> Vec<f64> {
    q.iter().zip(p_prime).map(|(&qc, &pc)| qc - pc).collect()
}

/// Gradient of `KL(f(x′)‖q_anchor)` with respect to `x′`.
pub fn kl_input_grad(model: &MLPModel, x_prime: &[f64], anchor_probs: &[f64]) -> Result<Vec<f64>> {
    let fwd = model.forward(x_prime)?;
    let p_prime = softmax(fwd.logits());
    let dz = kl_logit_grad_perturbed(&p_prime, anchor_probs);
    Ok(model.backprop_input(&fwd, &dz))
}

/// Gradient of `CE(f(x), y)` with respect to `x`.
pub fn ce_input_grad(model: &MLPModel, x: &[f64], y: usize) -> Result<Vec<f64>> {
    let fwd = model.forward(x)?;
    let probs = softmax(fwd.logits());
    let dz = ce_logit_grad(&probs, y);
    Ok(model.backprop_input(&fwd, &dz))
}

/// Cross-entropy at `x` and its parameter gradients.
pub fn ce_loss_and_param_grads(model: &MLPModel, x: &[f64], y: usize) -> Result<(f64, Gradients)> {
    let fwd = model.forward(x)?;
    let probs = softmax(fwd.logits());
    let loss = cross_entropy(&probs, y)?;
    let mut grads = Gradients::zeros_like(model);
    model.backprop_params(&fwd, &ce_logit_grad(&probs, y), &mut grads);
    Ok((loss, grads))
}

/// `KL(f(x′)‖f(x))` and its parameter gradients, differentiating through
/// both branches (`x′` is treated as a constant point).
pub fn kl_loss_and_param_grads(
    model: &MLPModel,
    x_prime: &[f64],
    x_anchor: &[f64],
) -> Result<(f64, Gradients)> {
    let fwd_anchor = model.forward(x_anchor)?;
    let fwd_prime = model.forward(x_prime)?;
    let q = softmax(fwd_anchor.logits());
    let p_prime = softmax(fwd_prime.logits());
    let loss = kl_div(&p_prime, &q)?;
    let mut grads = Gradients::zeros_like(model);
    model.backprop_params(&fwd_prime, &kl_logit_grad_perturbed(&p_prime, &q), &mut grads);
    model.backprop_params(&fwd_anchor, &kl_logit_grad_anchor(&p_prime, &q), &mut grads);
    Ok((loss, grads))
}

/// The pointwise regional-smoothness objective
/// `CE(f(x), y) + β·KL(f(x′)‖f(x))` with `x′` frozen, and its exact
/// parameter gradients.
pub fn eq1_loss_and_param_grads(
    model: &MLPModel,
    x: &[f64],
    y: usize,
    x_prime: &[f64],
    beta: f64,
) -> Result<(f64, Gradients)> {
    let fwd_anchor = model.forward(x)?;
    let fwd_prime = model.forward(x_prime)?;
    let q = softmax(fwd_anchor.logits());
    let p_prime = softmax(fwd_prime.logits());
    let ce = cross_entropy(&q, y)?;
    let kl = kl_div(&p_prime, &q)?;
    let mut grads = Gradients::zeros_like(model);
    let mut dz_anchor = ce_logit_grad(&q, y);
    for (g, a) in dz_anchor
        .iter_mut()
        .zip(kl_logit_grad_anchor(&p_prime, &q))
    {
        *g += beta * a;
    }
    model.backprop_params(&fwd_anchor, &dz_anchor, &mut grads);
    let dz_prime: Vec<f64> = kl_logit_grad_perturbed(&p_prime, &q)
        .into_iter()
        .map(|g| beta * g)
        .collect();
    model.backprop_params(&fwd_prime, &dz_prime, &mut grads);
    Ok((ce + beta * kl, grads))
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

/// JSON header preceding the parameter blob in a checkpoint file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub widths: Vec<usize>,
    pub activation: String,
    pub seed: u64,
    pub config: Value,
    pub param_count: usize,
}

const CHECKPOINT_FORMAT: &str = "ncg-checkpoint-v1";

/// Writes `model` to `path`: one JSON header line, then every parameter as
/// little-endian f64 in layer order, weights row-major before biases.
pub fn save_checkpoint(model: &MLPModel, path: &Path, seed: u64, config: Value) -> Result<()> {
    let param_count: usize = model
        .weights
        .iter()
        .map(|w| w.len())
        .chain(model.biases.iter().map(|b| b.len()))
        .sum();
    let header = CheckpointHeader {
        format: CHECKPOINT_FORMAT.into(),
        widths: model.widths.clone(),
        activation: "relu".into(),
        seed,
        config,
        param_count,
    };
    let mut bytes = serde_json::to_vec(&header).expect("header serializes");
    bytes.push(b'\n');
    for layer in 0..model.weights.len() {
        for &v in &model.weights[layer] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        for &v in &model.biases[layer] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut file = fs::File::create(path).map_err(|e| NcgError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    file.write_all(&bytes).map_err(|e| NcgError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

/// Reads a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(path: &Path) -> Result<(MLPModel, CheckpointHeader)> {
    let bytes = fs::read(path).map_err(|e| NcgError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| NcgError::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "missing header line".into(),
        })?;
    let header: CheckpointHeader =
        serde_json::from_slice(&bytes[..newline]).map_err(|e| NcgError::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: format!("bad header: {e}"),
        })?;
    if header.format != CHECKPOINT_FORMAT {
        return Err(NcgError::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: format!("unknown checkpoint format `{}`", header.format),
        });
    }
    let blob = &bytes[newline + 1..];
    if blob.len() != header.param_count * 8 {
        return Err(NcgError::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: format!(
                "expected {} parameter bytes, found {}",
                header.param_count * 8,
                blob.len()
            ),
        });
    }
    let mut values = blob
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let widths = header.widths.clone();
    let mut weights = Vec::with_capacity(widths.len() - 1);
    let mut biases = Vec::with_capacity(widths.len() - 1);
    for layer in 0..widths.len() - 1 {
        let w_len = widths[layer] * widths[layer + 1];
        weights.push((&mut values).take(w_len).collect::<Vec<f64>>());
        biases.push((&mut values).take(widths[layer + 1]).collect::<Vec<f64>>());
    }
    let model = MLPModel {
        widths,
        weights,
        biases,
    };
    Ok((model, header))
}
