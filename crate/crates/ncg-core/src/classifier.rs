//! Classifier abstraction shared by evaluation and attacks: anything that
//! maps a point to per-class scores. Gradient-capable models override the
//! input-gradient hook; black-box deciders fall back to central finite
//! differences on the cross-entropy of their softmaxed scores.

use crate::error::{NcgError, Result};
use crate::mlp::{self, softmax, MLPModel};
use crate::nnindex::NNIndex;

/// A classifier over d-dimensional inputs with C classes.
pub trait Classifier: Sync {
    fn input_dim(&self) -> usize;
    fn class_count(&self) -> usize;

    /// Per-class scores; prediction is their argmax.
    fn logits(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Argmax class, ties to the smallest index.
    fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(mlp::argmax(&self.logits(x)?))
    }

    /// Gradient of `CE(softmax(logits(x)), y)` with respect to `x`; the
    /// default is a central finite difference with step 1e−6.
    fn ce_input_grad(&self, x: &[f64], y: usize) -> Result<Vec<f64>> {
        let h = 1e-6;
        let mut grad = Vec::with_capacity(x.len());
        let mut probe = x.to_vec();
        for dim in 0..x.len() {
            probe[dim] = x[dim] + h;
            let up = mlp::cross_entropy(&softmax(&self.logits(&probe)?), y)?;
            probe[dim] = x[dim] - h;
            let down = mlp::cross_entropy(&softmax(&self.logits(&probe)?), y)?;
            probe[dim] = x[dim];
            grad.push((up - down) / (2.0 * h));
        }
        Ok(grad)
    }
}

impl Classifier for MLPModel {
    fn input_dim(&self) -> usize {
        self.input_dim()
    }

    fn class_count(&self) -> usize {
        self.class_count()
    }

    fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.logits().to_vec())
    }

    fn ce_input_grad(&self, x: &[f64], y: usize) -> Result<Vec<f64>> {
        mlp::ce_input_grad(self, x, y)
    }
}

/// The 1-NN rule as a classifier: predicts the label of the nearest
/// training point. Scores are a one-hot indicator, so this is only useful
/// for prediction, not gradients.
pub struct NNClassifier<'a> {
    index: &'a NNIndex<'a>,
}

impl<'a> NNClassifier<'a> {
    pub fn new(index: &'a NNIndex<'a>) -> Self {
        Self { index }
    }
}

impl Classifier for NNClassifier<'_> {
    fn input_dim(&self) -> usize {
        self.index.dataset().dim()
    }

    fn class_count(&self) -> usize {
        self.index.dataset().class_count
    }

    fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        let neighbor = self.index.nearest(x)?;
        let mut scores = vec![0.0; self.class_count()];
        scores[neighbor.label] = 1.0;
        Ok(scores)
    }
}

/// Analytic two-class linear decider: class 1 iff `w·x > bias`. Used to
/// validate attacks against exact boundary geometry.
pub struct LinearBinary {
    pub w: Vec<f64>,
    pub bias: f64,
}

impl LinearBinary {
    pub fn new(w: Vec<f64>, bias: f64) -> Result<Self> {
        if w.iter().all(|&v| v == 0.0) {
            return Err(NcgError::InvalidParameter {
                name: "w",
                why: "zero normal vector".into(),
            });
        }
        Ok(Self { w, bias })
    }

    /// Exact L2 distance from `x` to the decision boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let margin = crate::linalg::dot(&self.w, x) - self.bias;
        margin.abs() / crate::linalg::norm(&self.w)
    }
}

impl Classifier for LinearBinary {
    fn input_dim(&self) -> usize {
        self.w.len()
    }

    fn class_count(&self) -> usize {
        2
    }

    fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0, crate::linalg::dot(&self.w, x) - self.bias])
    }
}
