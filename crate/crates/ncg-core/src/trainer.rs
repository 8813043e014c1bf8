//! Minibatch SGD training of the MLP under the regional-smoothness
//! objective: natural cross-entropy, TRADES with a uniform ball, the
//! adaptive-radius (Algorithm 1 style) non-uniform ball, fitted ellipsoids,
//! and sub-Voronoi cells. The inner maximization is PGD with projection
//! after every step.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{NcgError, Result};
use crate::linalg;
use crate::mlp::{
    self, ce_logit_grad, cross_entropy, kl_div, kl_logit_grad_anchor, kl_logit_grad_perturbed,
    softmax, Forward, Gradients, MLPModel,
};
use crate::nnindex::NNIndex;
use crate::regions::{self, RegionSpec};
use crate::rng::{self, STREAM_INIT, STREAM_PGD, STREAM_SHUFFLE};

/// Training objective / smoothness-region family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Natural,
    TradesUniform,
    NonuniformBall,
    Ellipsoid,
    Subvoronoi,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Natural,
        Method::TradesUniform,
        Method::NonuniformBall,
        Method::Ellipsoid,
        Method::Subvoronoi,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Natural => "natural",
            Method::TradesUniform => "trades_uniform",
            Method::NonuniformBall => "nonuniform_ball",
            Method::Ellipsoid => "ellipsoid",
            Method::Subvoronoi => "subvoronoi",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = NcgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(Method::Natural),
            "trades_uniform" => Ok(Method::TradesUniform),
            "nonuniform_ball" => Ok(Method::NonuniformBall),
            "ellipsoid" => Ok(Method::Ellipsoid),
            "subvoronoi" => Ok(Method::Subvoronoi),
            other => Err(NcgError::InvalidParameter {
                name: "method",
                why: format!(
                    "unknown method `{other}` (expected natural, trades_uniform, \
                     nonuniform_ball, ellipsoid, or subvoronoi)"
                ),
            }),
        }
    }
}

/// Full training configuration; every run is determined by this plus the
/// dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub method: Method,
    /// Eq. 1 tradeoff β.
    pub beta: f64,
    /// Uniform-ball radius.
    pub r: f64,
    /// Shrinkage λ for non-uniform balls and sub-Voronoi cells.
    pub lambda: f64,
    /// Differently-labeled sample count for ellipsoid fitting.
    pub k: usize,
    /// Sub-Voronoi subsample size.
    pub m_samples: usize,
    /// PGD iterations for the inner maximization.
    pub t_pgd: usize,
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub batch_size: usize,
    /// Adaptive radius step η.
    pub eta: f64,
    /// Adaptive radius KL threshold.
    pub thresh: f64,
    pub seed: u64,
    /// Hidden-layer widths.
    pub hidden: Vec<usize>,
    /// Epochs (1-based) at whose start the learning rate is multiplied
    /// by 0.1.
    pub decay_epochs: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: Method::Natural,
            beta: 6.0,
            r: 0.5,
            lambda: 1.0,
            k: 100,
            m_samples: 50,
            t_pgd: 10,
            epochs: 200,
            lr: 0.01,
            momentum: 0.9,
            batch_size: 64,
            eta: 0.01,
            thresh: 0.1,
            seed: 0,
            hidden: vec![64, 64],
            decay_epochs: Vec::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 3] =
            [("r", self.r), ("lr", self.lr), ("thresh", self.thresh)];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(NcgError::InvalidParameter {
                    name,
                    why: format!("must be positive and finite, got {value}"),
                });
            }
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(NcgError::InvalidParameter {
                name: "beta",
                why: format!("must be ≥ 0, got {}", self.beta),
            });
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(NcgError::InvalidParameter {
                name: "lambda",
                why: format!("must lie in (0, 1], got {}", self.lambda),
            });
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(NcgError::InvalidParameter {
                name: "eta",
                why: format!("must be ≥ 0, got {}", self.eta),
            });
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(NcgError::InvalidParameter {
                name: "momentum",
                why: format!("must lie in [0, 1), got {}", self.momentum),
            });
        }
        if self.epochs == 0 {
            return Err(NcgError::InvalidParameter {
                name: "epochs",
                why: "must be ≥ 1".into(),
            });
        }
        if self.batch_size == 0 {
            return Err(NcgError::InvalidParameter {
                name: "batch_size",
                why: "must be ≥ 1".into(),
            });
        }
        if self.m_samples == 0 {
            return Err(NcgError::InvalidParameter {
                name: "m_samples",
                why: "must be ≥ 1".into(),
            });
        }
        Ok(())
    }

    /// Network widths for a dataset: `[d, hidden…, C]`.
    pub fn widths(&self, ds: &LabeledDataset) -> Vec<usize> {
        let mut widths = Vec::with_capacity(self.hidden.len() + 2);
        widths.push(ds.dim());
        widths.extend_from_slice(&self.hidden);
        widths.push(ds.class_count);
        widths
    }
}

/// One epoch of training history.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub train_accuracy: f64,
    /// Mean adaptive radius; present only for the non-uniform-ball method.
    pub mean_epsilon: Option<f64>,
}

/// Per-example adaptive radii for the non-uniform-ball method.
#[derive(Debug, Clone)]
pub struct AdaptiveRadiusState {
    pub eps: Vec<f64>,
    pub eps_max: Vec<f64>,
}

impl AdaptiveRadiusState {
    /// Fresh state with all radii at zero.
    pub fn new(eps_max: Vec<f64>) -> Self {
        Self {
            eps: vec![0.0; eps_max.len()],
            eps_max,
        }
    }

    /// Per-epoch ramp: ε_i ← min(ε_i + η, ε_i^max).
    pub fn increment(&mut self, i: usize, eta: f64) {
        self.eps[i] = (self.eps[i] + eta).min(self.eps_max[i]);
    }

    /// Threshold penalty: ε_i ← max(ε_i − 2η, 0) when the KL exceeds
    /// `thresh`.
    pub fn penalize(&mut self, i: usize, kl_value: f64, eta: f64, thresh: f64) {
        if kl_value > thresh {
            self.eps[i] = (self.eps[i] - 2.0 * eta).max(0.0);
        }
    }

    /// Whether 0 ≤ ε_i ≤ ε_i^max holds everywhere.
    pub fn is_valid(&self) -> bool {
        self.eps
            .iter()
            .zip(&self.eps_max)
            .all(|(&e, &m)| (0.0..=m).contains(&e))
    }
}

fn finite_logits(logits: &[f64], epoch: usize) -> Result<()> {
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(NcgError::Diverged { epoch });
    }
    Ok(())
}

/// Inner maximization of `KL(f(x′), f(x_i))` over `region` by projected
/// gradient ascent: T steps of `x ← project(x + α·g)` from a seeded jitter
/// of the anchor, returning the iterate with the largest KL seen.
pub fn pgd_inner_max(
    model: &MLPModel,
    region: &RegionSpec,
    t: usize,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if !region.contains(&region.x_i)? {
        return Err(NcgError::AnchorOutsideRegion);
    }
    if t == 0 || alpha <= 0.0 {
        return Ok(region.x_i.clone());
    }
    let (_, q) = model.probs(&region.x_i)?;
    // The KL gradient vanishes identically at the anchor, so the chain must
    // start off-center: jitter by one step's worth of Gaussian noise.
    let normal = StandardNormal;
    let mut x: Vec<f64> = region
        .x_i
        .iter()
        .map(|&c| {
            let g: f64 = normal.sample(rng);
            c + alpha * g
        })
        .collect();
    x = region.project(&x)?;
    let mut best = x.clone();
    let mut best_kl = {
        let (_, p) = model.probs(&x)?;
        kl_div(&p, &q)?
    };
    for _ in 0..t {
        let g = mlp::kl_input_grad(model, &x, &q)?;
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += alpha * gi;
        }
        x = region.project(&x)?;
        let (_, p) = model.probs(&x)?;
        let kl = kl_div(&p, &q)?;
        if kl > best_kl {
            best_kl = kl;
            best = x.clone();
        }
    }
    Ok(best)
}

/// Algorithm 1's inner maximization: sign-step ascent accumulating a
/// perturbation δ that is re-projected onto B(0, ε) after every step.
fn sign_pgd(
    model: &MLPModel,
    x_i: &[f64],
    q: &[f64],
    eps: f64,
    t: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if t == 0 || eps <= 0.0 {
        return Ok(x_i.to_vec());
    }
    let alpha = eps / 5.0;
    let normal = StandardNormal;
    let mut delta: Vec<f64> = (0..x_i.len())
        .map(|_| {
            let g: f64 = normal.sample(rng);
            alpha * g
        })
        .collect();
    clamp_norm(&mut delta, eps);
    let mut x: Vec<f64> = x_i.iter().zip(&delta).map(|(c, d)| c + d).collect();
    let mut best = x.clone();
    let mut best_kl = {
        let (_, p) = model.probs(&x)?;
        kl_div(&p, q)?
    };
    for _ in 0..t {
        let g = mlp::kl_input_grad(model, &x, q)?;
        for (d, gi) in delta.iter_mut().zip(&g) {
            *d += alpha * sign(*gi);
        }
        clamp_norm(&mut delta, eps);
        x = x_i.iter().zip(&delta).map(|(c, d)| c + d).collect();
        let (_, p) = model.probs(&x)?;
        let kl = kl_div(&p, q)?;
        if kl > best_kl {
            best_kl = kl;
            best = x.clone();
        }
    }
    Ok(best)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn clamp_norm(delta: &mut [f64], radius: f64) {
    let norm = linalg::norm(delta);
    if norm > radius {
        let scale = radius / norm;
        delta.iter_mut().for_each(|d| *d *= scale);
    }
}

/// Mean of `ℓ(f(x_i), y_i) + β·KL(f(x′_i), f(x_i))` over a batch, with each
/// `x′_i` found by [`pgd_inner_max`] in its region.
pub fn trades_loss(
    model: &MLPModel,
    points: &[Vec<f64>],
    labels: &[usize],
    regions: &[RegionSpec],
    beta: f64,
    t_pgd: usize,
    seed: u64,
) -> Result<f64> {
    if points.len() != regions.len() || points.len() != labels.len() {
        return Err(NcgError::InvalidParameter {
            name: "regions",
            why: format!(
                "batch of {} points with {} labels and {} regions",
                points.len(),
                labels.len(),
                regions.len()
            ),
        });
    }
    if points.is_empty() {
        return Err(NcgError::EmptyDataset);
    }
    let mut total = 0.0;
    for ((x, &y), region) in points.iter().zip(labels).zip(regions) {
        let (_, q) = model.probs(x)?;
        let ce = cross_entropy(&q, y)?;
        let kl = if beta == 0.0 || t_pgd == 0 {
            0.0
        } else {
            let mut item_rng = rng::item_stream(seed, region.anchor as u64, STREAM_PGD);
            let x_prime =
                pgd_inner_max(model, region, t_pgd, region.pgd_step_size(), &mut item_rng)?;
            let (_, p) = model.probs(&x_prime)?;
            kl_div(&p, &q)?
        };
        total += ce + beta * kl;
    }
    Ok(total / points.len() as f64)
}

/// Fraction of training points whose argmax prediction matches the label.
pub fn evaluate_accuracy(model: &MLPModel, ds: &LabeledDataset) -> Result<f64> {
    let mut correct = 0usize;
    let mut fwd = Forward::default();
    for (x, &y) in ds.points.iter().zip(&ds.labels) {
        model.forward_into(x, &mut fwd)?;
        if mlp::argmax(fwd.logits()) == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds.n() as f64)
}

/// Builds each training point's smoothness region once, up front.
fn build_regions(config: &TrainConfig, ds: &LabeledDataset) -> Result<Option<Vec<RegionSpec>>> {
    match config.method {
        Method::Natural | Method::NonuniformBall => Ok(None),
        Method::TradesUniform => (0..ds.n())
            .map(|i| regions::build_uniform_ball(ds, i, config.r))
            .collect::<Result<Vec<_>>>()
            .map(Some),
        Method::Ellipsoid => (0..ds.n())
            .into_par_iter()
            .map(|i| regions::fit_ellipsoid(ds, i, config.k))
            .collect::<Result<Vec<_>>>()
            .map(Some),
        Method::Subvoronoi => (0..ds.n())
            .into_par_iter()
            .map(|i| regions::build_subvoronoi(ds, i, config.m_samples, config.lambda, config.seed))
            .collect::<Result<Vec<_>>>()
            .map(Some),
    }
}

/// Trains a model per `config`; deterministic given the seed. Returns the
/// final model and per-epoch history.
pub fn train(config: &TrainConfig, ds: &LabeledDataset) -> Result<(MLPModel, Vec<EpochStats>)> {
    config.validate()?;
    let widths = config.widths(ds);
    let mut init_rng = rng::substream(config.seed, STREAM_INIT);
    let mut model = MLPModel::new(&widths, &mut init_rng)?;
    let regions = build_regions(config, ds)?;
    let mut adaptive = if config.method == Method::NonuniformBall {
        let index = NNIndex::new(ds);
        let caps = (0..ds.n())
            .map(|i| regions::nonuniform_radius(&index, i, config.lambda))
            .collect::<Result<Vec<_>>>()?;
        Some(AdaptiveRadiusState::new(caps))
    } else {
        None
    };

    let mut velocity = Gradients::zeros_like(&model);
    let mut grads = Gradients::zeros_like(&model);
    let mut history = Vec::with_capacity(config.epochs);
    let mut lr = config.lr;
    let mut indices: Vec<usize> = (0..ds.n()).collect();

    for epoch in 1..=config.epochs {
        if config.decay_epochs.contains(&epoch) {
            lr *= 0.1;
        }
        let mut shuffle_rng = rng::item_stream(config.seed, epoch as u64, STREAM_SHUFFLE);
        indices.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;

        for batch in indices.chunks(config.batch_size) {
            if let Some(state) = adaptive.as_mut() {
                for &i in batch {
                    state.increment(i, config.eta);
                }
            }
            // Inner maximizations run against frozen parameters and are
            // independent, so they parallelize; accumulation below stays in
            // batch order for bit-identical results.
            let smooth = config.beta > 0.0 && config.t_pgd > 0;
            let inner: Vec<Option<Vec<f64>>> = if !smooth
                || config.method == Method::Natural
            {
                vec![None; batch.len()]
            } else if let Some(state) = adaptive.as_ref() {
                batch
                    .par_iter()
                    .map(|&i| {
                        let (_, q) = model.probs(&ds.points[i])?;
                        let mut item_rng =
                            rng::item_stream(config.seed, i as u64, STREAM_PGD + epoch as u64);
                        sign_pgd(
                            &model,
                            &ds.points[i],
                            &q,
                            state.eps[i],
                            config.t_pgd,
                            &mut item_rng,
                        )
                        .map(Some)
                    })
                    .collect::<Result<Vec<_>>>()?
            } else {
                let region_list = regions.as_deref().expect("regions built for method");
                batch
                    .par_iter()
                    .map(|&i| {
                        let region = &region_list[i];
                        let mut item_rng =
                            rng::item_stream(config.seed, i as u64, STREAM_PGD + epoch as u64);
                        pgd_inner_max(
                            &model,
                            region,
                            config.t_pgd,
                            region.pgd_step_size(),
                            &mut item_rng,
                        )
                        .map(Some)
                    })
                    .collect::<Result<Vec<_>>>()?
            };

            grads.clear();
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for (&i, x_prime) in batch.iter().zip(&inner) {
                let fwd_anchor = model.forward(&ds.points[i])?;
                finite_logits(fwd_anchor.logits(), epoch)?;
                let q = softmax(fwd_anchor.logits());
                let ce = cross_entropy(&q, ds.labels[i])?;
                let mut dz_anchor = ce_logit_grad(&q, ds.labels[i]);
                let mut loss_i = ce;
                if let Some(x_prime) = x_prime {
                    let fwd_prime = model.forward(x_prime)?;
                    finite_logits(fwd_prime.logits(), epoch)?;
                    let p_prime = softmax(fwd_prime.logits());
                    let kl = kl_div(&p_prime, &q)?;
                    loss_i += config.beta * kl;
                    for (g, a) in dz_anchor
                        .iter_mut()
                        .zip(kl_logit_grad_anchor(&p_prime, &q))
                    {
                        *g += config.beta * a;
                    }
                    let dz_prime: Vec<f64> = kl_logit_grad_perturbed(&p_prime, &q)
                        .into_iter()
                        .map(|g| scale * config.beta * g)
                        .collect();
                    model.backprop_params(&fwd_prime, &dz_prime, &mut grads);
                    if let Some(state) = adaptive.as_mut() {
                        state.penalize(i, kl, config.eta, config.thresh);
                    }
                }
                dz_anchor.iter_mut().for_each(|g| *g *= scale);
                model.backprop_params(&fwd_anchor, &dz_anchor, &mut grads);
                batch_loss += loss_i;
            }
            if !batch_loss.is_finite() {
                return Err(NcgError::Diverged { epoch });
            }
            epoch_loss += batch_loss;

            for layer in 0..model.weights.len() {
                for (v, g) in velocity.weights[layer].iter_mut().zip(&grads.weights[layer]) {
                    *v = config.momentum * *v + g;
                }
                for (w, v) in model.weights[layer].iter_mut().zip(&velocity.weights[layer]) {
                    *w -= lr * v;
                }
                for (v, g) in velocity.biases[layer].iter_mut().zip(&grads.biases[layer]) {
                    *v = config.momentum * *v + g;
                }
                for (b, v) in model.biases[layer].iter_mut().zip(&velocity.biases[layer]) {
                    *b -= lr * v;
                }
            }
        }

        let mean_epsilon = adaptive
            .as_ref()
            .map(|s| s.eps.iter().sum::<f64>() / s.eps.len() as f64);
        history.push(EpochStats {
            epoch,
            loss: epoch_loss / ds.n() as f64,
            train_accuracy: evaluate_accuracy(&model, ds)?,
            mean_epsilon,
        });
    }
    Ok((model, history))
}
