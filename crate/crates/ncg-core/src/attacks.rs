//! PGD adversarial attack inside an L2 ball and bisection-based empirical
//! robust-radius estimation.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::error::{NcgError, Result};
use crate::linalg;
use crate::nnindex::NNIndex;
use crate::rng::{self, STREAM_ATTACK};

/// Attack strength and radius-search parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackConfig {
    /// PGD iterations per restart.
    pub t_attack: usize,
    /// Random restarts (the first restart starts at the clean point).
    pub restarts: usize,
    /// Radius bisection iterations.
    pub bisect_steps: usize,
    /// Upper bound of the radius search.
    pub r_hi: f64,
}

impl AttackConfig {
    /// Standard attack strength with a caller-chosen search bound.
    pub fn with_r_hi(r_hi: f64) -> Self {
        Self {
            t_attack: 40,
            restarts: 3,
            bisect_steps: 12,
            r_hi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_attack == 0 || self.restarts == 0 || self.bisect_steps == 0 {
            return Err(NcgError::InvalidParameter {
                name: "attack",
                why: "t_attack, restarts, and bisect_steps must all be ≥ 1".into(),
            });
        }
        if !(self.r_hi > 0.0 && self.r_hi.is_finite()) {
            return Err(NcgError::InvalidParameter {
                name: "r_hi",
                why: format!("search bound must be positive and finite, got {}", self.r_hi),
            });
        }
        Ok(())
    }
}

/// Distance from `x` to the farthest training point — the default radius
/// search bound.
pub fn farthest_training_distance(index: &NNIndex, x: &[f64]) -> f64 {
    index
        .dataset()
        .points
        .iter()
        .map(|p| linalg::dist(p, x))
        .fold(0.0, f64::max)
}

/// PGD attack: gradient ascent on the cross-entropy at `x` with step
/// `radius/5`, projected onto `B(x, radius)` after every step. Returns the
/// closest label-changing point found across restarts, or `None`.
pub fn pgd_attack(
    classifier: &dyn Classifier,
    x: &[f64],
    y: usize,
    radius: f64,
    config: &AttackConfig,
    seed: u64,
) -> Result<Option<Vec<f64>>> {
    config.validate()?;
    if classifier.predict(x)? != y {
        return Ok(Some(x.to_vec()));
    }
    if radius <= 0.0 {
        return Ok(None);
    }
    let alpha = radius / 5.0;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for restart in 0..config.restarts {
        let mut item_rng = rng::item_stream(seed, restart as u64, STREAM_ATTACK);
        let mut current = if restart == 0 {
            x.to_vec()
        } else {
            // Uniform in the ball: Gaussian direction, radius ∝ u^(1/d).
            let normal = StandardNormal;
            let mut dir: Vec<f64> = (0..x.len()).map(|_| normal.sample(&mut item_rng)).collect();
            let norm = linalg::norm(&dir);
            if norm > 0.0 {
                let u: f64 = rand::Rng::random(&mut item_rng);
                let scale = radius * u.powf(1.0 / x.len() as f64) / norm;
                dir.iter_mut().for_each(|v| *v *= scale);
            }
            let point: Vec<f64> = x.iter().zip(&dir).map(|(c, d)| c + d).collect();
            point
        };
        for _ in 0..config.t_attack {
            let g = classifier.ce_input_grad(&current, y)?;
            if g.iter().any(|v| !v.is_finite()) {
                return Err(NcgError::NumericalFailure(
                    "non-finite attack gradient".into(),
                ));
            }
            let norm = linalg::norm(&g);
            if norm == 0.0 {
                break;
            }
            for (c, gi) in current.iter_mut().zip(&g) {
                *c += alpha * gi / norm;
            }
            project_ball(&mut current, x, radius);
            if classifier.predict(&current)? != y {
                let dist = linalg::dist(&current, x);
                if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                    best = Some((dist, current.clone()));
                }
            }
        }
    }
    Ok(best.map(|(_, point)| point))
}

fn project_ball(point: &mut [f64], center: &[f64], radius: f64) {
    let dist = linalg::dist(point, center);
    if dist > radius {
        let scale = radius / dist;
        for (p, c) in point.iter_mut().zip(center) {
            *p = c + scale * (*p - c);
        }
    }
}

/// Empirical robust radius: bisects radius in `[0, r_hi]` for the smallest
/// radius at which the PGD attack succeeds, warm-starting each probe with
/// the closest adversarial found so far, and returns the final bracket's
/// midpoint.
pub fn empirical_robust_radius(
    classifier: &dyn Classifier,
    x: &[f64],
    y: usize,
    config: &AttackConfig,
    seed: u64,
) -> Result<f64> {
    config.validate()?;
    if classifier.predict(x)? != y {
        return Ok(0.0);
    }
    let mut best: Option<Vec<f64>> = pgd_attack(classifier, x, y, config.r_hi, config, seed)?;
    if best.is_none() {
        return Err(NcgError::RadiusBracketExceeded { r_hi: config.r_hi });
    }
    let mut lo = 0.0;
    let mut hi = config.r_hi;
    for _ in 0..config.bisect_steps {
        let mid = 0.5 * (lo + hi);
        let warm_hit = best
            .as_ref()
            .is_some_and(|adv| linalg::dist(adv, x) <= mid);
        let success = if warm_hit {
            true
        } else if let Some(adv) = pgd_attack(classifier, x, y, mid, config, seed)? {
            let closer = best
                .as_ref()
                .is_none_or(|prev| linalg::dist(&adv, x) < linalg::dist(prev, x));
            if closer {
                best = Some(adv);
            }
            true
        } else {
            false
        };
        if success {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
