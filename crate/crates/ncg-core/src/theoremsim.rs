//! Sample-complexity simulator for the corner-cube construction: measures
//! how many draws a 1-NN learner needs before it labels the off-support
//! test region correctly, versus how many it needs to see the full support.
//!
//! The world places, for each class `j` in `1..=C`, three axis-aligned
//! cubes of side `1/sqrt(d)` along the first coordinate axis, cornered at
//! `2i + 1 + 10j` for `i` in `{0, 1, 2}`. Training draws come from the
//! `i = 0` cube with probability `1 - eps` and the rare `i = 1` cube
//! otherwise; test draws come uniformly from the never-trained-on `i = 2`
//! cube of a uniformly random class.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NcgError, Result};
use crate::linalg;
use crate::rng::{self, STREAM_GEN};

/// Hard ceiling on draws per trial before the simulator gives up.
pub const TRIAL_CAP: u64 = 1_000_000_000;

/// The cube-world geometry: `class_count` classes in `dim` dimensions with
/// rare-cube mass `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremWorld {
    class_count: usize,
    dim: usize,
    eps: f64,
}

/// One training draw: the sampled point, its class in `1..=C`, and which
/// cube (`0` common, `1` rare) it landed in.
#[derive(Debug, Clone, PartialEq)]
pub struct MuDraw {
    pub point: Vec<f64>,
    pub class_j: usize,
    pub cube_i: usize,
}

/// Stopping times and snapshot test accuracy for a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub samples_to_ncg: u64,
    pub samples_to_detect: u64,
    pub nu_correct_fraction: f64,
}

/// Location summary of one stopping-time distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// Aggregate over a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub trials: usize,
    pub ncg: StatSummary,
    pub detect: StatSummary,
    pub mean_nu_correct_fraction: f64,
}

impl TheoremWorld {
    pub fn new(class_count: usize, dim: usize, eps: f64) -> Result<Self> {
        if class_count < 1 {
            return Err(NcgError::InvalidParameter {
                name: "class_count",
                why: "need at least one class".into(),
            });
        }
        if dim < 1 {
            return Err(NcgError::InvalidParameter {
                name: "dim",
                why: "need at least one dimension".into(),
            });
        }
        if !(eps > 0.0 && eps < 0.5) {
            return Err(NcgError::InvalidParameter {
                name: "eps",
                why: format!("rare-cube mass must lie strictly in (0, 0.5), got {eps}"),
            });
        }
        Ok(Self {
            class_count,
            dim,
            eps,
        })
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Cube side length `1/sqrt(d)`.
    pub fn side(&self) -> f64 {
        1.0 / (self.dim as f64).sqrt()
    }

    /// First coordinate of cube `i` of class `j`.
    pub fn corner(&self, i: usize, j: usize) -> f64 {
        (2 * i + 1 + 10 * j) as f64
    }

    /// Whether `x` lies in cube `i` of class `j` (closed bounds).
    pub fn cube_contains(&self, i: usize, j: usize, x: &[f64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let side = self.side();
        let corner = self.corner(i, j);
        if !(x[0] >= corner && x[0] <= corner + side) {
            return false;
        }
        x[1..].iter().all(|&v| (0.0..=side).contains(&v))
    }

    fn sample_in_cube<R: Rng + ?Sized>(&self, i: usize, j: usize, rng: &mut R) -> Vec<f64> {
        let side = self.side();
        let corner = self.corner(i, j);
        (0..self.dim)
            .map(|k| {
                let u: f64 = rng.random();
                if k == 0 {
                    corner + side * u
                } else {
                    side * u
                }
            })
            .collect()
    }

    /// One draw from the training distribution.
    pub fn sample_mu<R: Rng + ?Sized>(&self, rng: &mut R) -> MuDraw {
        let class_j = rng.random_range(1..=self.class_count);
        let u: f64 = rng.random();
        let cube_i = usize::from(u >= 1.0 - self.eps);
        let point = self.sample_in_cube(cube_i, class_j, rng);
        MuDraw {
            point,
            class_j,
            cube_i,
        }
    }

    /// One draw from the test distribution: a uniform point in the `i = 2`
    /// cube of a uniformly random class, returned with its true class.
    pub fn sample_nu<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, usize) {
        let class_j = rng.random_range(1..=self.class_count);
        let point = self.sample_in_cube(2, class_j, rng);
        (point, class_j)
    }
}

fn nu_snapshot_accuracy<R: Rng + ?Sized>(
    world: &TheoremWorld,
    stored: &[MuDraw],
    rng: &mut R,
    n_test: usize,
) -> f64 {
    let mut hits = 0usize;
    for _ in 0..n_test {
        let (x, truth) = world.sample_nu(rng);
        let mut best_d2 = f64::INFINITY;
        let mut best_label = 0usize;
        for draw in stored {
            let d2 = linalg::dist_sq(&x, &draw.point);
            if d2 < best_d2 {
                best_d2 = d2;
                best_label = draw.class_j;
            }
        }
        if best_label == truth {
            hits += 1;
        }
    }
    hits as f64 / n_test as f64
}

/// Run one trial: draw from `mu` until every common cube has been hit
/// (recording the stopping time and a 1-NN test snapshot at that moment),
/// then keep drawing until every cube, rare ones included, has been hit.
pub fn trial<R: Rng + ?Sized>(
    world: &TheoremWorld,
    rng: &mut R,
    n_test: usize,
) -> Result<TrialRecord> {
    if n_test == 0 {
        return Err(NcgError::InvalidParameter {
            name: "n_test",
            why: "snapshot evaluation needs at least one test draw".into(),
        });
    }
    let c = world.class_count();
    let mut seen = vec![[false; 2]; c];
    let mut missing_common = c;
    let mut missing_total = 2 * c;
    let mut stored: Vec<MuDraw> = Vec::new();
    let mut draws: u64 = 0;
    let mut samples_to_ncg: Option<u64> = None;
    let mut nu_correct_fraction = 0.0;

    loop {
        if draws >= TRIAL_CAP {
            return Err(NcgError::TrialCapExceeded { cap: TRIAL_CAP });
        }
        let draw = world.sample_mu(rng);
        draws += 1;
        let flag = &mut seen[draw.class_j - 1][draw.cube_i];
        if !*flag {
            *flag = true;
            missing_total -= 1;
            if draw.cube_i == 0 {
                missing_common -= 1;
            }
        }
        if samples_to_ncg.is_none() {
            stored.push(draw);
            if missing_common == 0 {
                samples_to_ncg = Some(draws);
                nu_correct_fraction = nu_snapshot_accuracy(world, &stored, rng, n_test);
            }
        }
        if missing_total == 0 {
            let samples_to_ncg =
                samples_to_ncg.expect("full coverage implies common coverage");
            return Ok(TrialRecord {
                samples_to_ncg,
                samples_to_detect: draws,
                nu_correct_fraction,
            });
        }
    }
}

impl StatSummary {
    /// Summary of a non-empty sample, quantiles by linear interpolation.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(NcgError::EmptyDataset);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let quantile = |q: f64| {
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        };
        Ok(Self {
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            median: quantile(0.5),
            q1: quantile(0.25),
            q3: quantile(0.75),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Run `trials` independent trials (one derived stream per trial, so the
/// batch is reproducible and parallelism-order independent) and summarize
/// both stopping-time distributions.
pub fn complexity_curve(
    world: &TheoremWorld,
    trials: usize,
    n_test: usize,
    base_seed: u64,
) -> Result<(CurveSummary, Vec<TrialRecord>)> {
    if trials == 0 {
        return Err(NcgError::InvalidParameter {
            name: "trials",
            why: "need at least one trial".into(),
        });
    }
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::item_stream(base_seed, t as u64, STREAM_GEN);
            trial(world, &mut rng, n_test)
        })
        .collect::<Result<Vec<_>>>()?;
    let ncg: Vec<f64> = records.iter().map(|r| r.samples_to_ncg as f64).collect();
    let detect: Vec<f64> = records.iter().map(|r| r.samples_to_detect as f64).collect();
    let mean_nu_correct_fraction =
        records.iter().map(|r| r.nu_correct_fraction).sum::<f64>() / trials as f64;
    let summary = CurveSummary {
        trials,
        ncg: StatSummary::from_values(&ncg)?,
        detect: StatSummary::from_values(&detect)?,
        mean_nu_correct_fraction,
    };
    Ok((summary, records))
}

fn cube_axis_range(world: &TheoremWorld, i: usize, j: usize) -> (f64, f64) {
    let corner = world.corner(i, j);
    (corner, corner + world.side())
}

/// Largest within-class and smallest cross-class distance over the full
/// support (all three cubes per class). With a single class there is no
/// cross-class pair, so the minimum is infinite.
pub fn separation_bounds(world: &TheoremWorld) -> (f64, f64) {
    let side = world.side();
    let off_axis = (world.dim() - 1) as f64 * side * side;
    let axis_min = |a: (f64, f64), b: (f64, f64)| (b.0 - a.1).max(a.0 - b.1).max(0.0);
    let axis_max = |a: (f64, f64), b: (f64, f64)| (a.1 - b.0).max(b.1 - a.0);

    let mut max_same = 0.0f64;
    let mut min_diff = f64::INFINITY;
    for j1 in 1..=world.class_count() {
        for j2 in 1..=world.class_count() {
            for i1 in 0..3 {
                for i2 in 0..3 {
                    let a = cube_axis_range(world, i1, j1);
                    let b = cube_axis_range(world, i2, j2);
                    if j1 == j2 {
                        let along = axis_max(a, b);
                        max_same = max_same.max((along * along + off_axis).sqrt());
                    } else {
                        let gap = axis_min(a, b);
                        min_diff = min_diff.min(gap);
                    }
                }
            }
        }
    }
    (max_same, min_diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::chi2_uniform;

    #[test]
    fn world_domain_checks() {
        assert!(TheoremWorld::new(0, 3, 0.1).is_err());
        assert!(TheoremWorld::new(2, 0, 0.1).is_err());
        assert!(TheoremWorld::new(2, 3, 0.0).is_err());
        assert!(TheoremWorld::new(2, 3, 0.5).is_err());
        assert!(TheoremWorld::new(2, 3, -0.1).is_err());
        assert!(TheoremWorld::new(1, 1, 0.49).is_ok());
    }

    #[test]
    fn corners_and_membership_in_one_dimension() {
        let world = TheoremWorld::new(2, 1, 0.1).unwrap();
        assert_eq!(world.side(), 1.0);
        assert_eq!(world.corner(0, 1), 11.0);
        assert_eq!(world.corner(1, 1), 13.0);
        assert_eq!(world.corner(2, 1), 15.0);
        assert_eq!(world.corner(0, 2), 21.0);
        assert!(world.cube_contains(0, 1, &[11.0]));
        assert!(world.cube_contains(0, 1, &[11.5]));
        assert!(world.cube_contains(0, 1, &[12.0]));
        assert!(!world.cube_contains(0, 1, &[12.5]));
        assert!(world.cube_contains(2, 1, &[15.5]));
        assert!(!world.cube_contains(2, 1, &[16.5]));
    }

    #[test]
    fn rare_cube_frequency_matches_eps() {
        let world = TheoremWorld::new(3, 2, 0.05).unwrap();
        let mut r = rng::seeded(11);
        let n = 100_000usize;
        let mut rare = 0usize;
        for _ in 0..n {
            let draw = world.sample_mu(&mut r);
            assert!(world.cube_contains(draw.cube_i, draw.class_j, &draw.point));
            assert!(draw.cube_i <= 1);
            assert!((1..=3).contains(&draw.class_j));
            if draw.cube_i == 1 {
                rare += 1;
            }
        }
        let freq = rare as f64 / n as f64;
        let tol = 4.0 * (0.05f64 * 0.95 / n as f64).sqrt();
        assert!(
            (freq - 0.05).abs() <= tol,
            "rare frequency {freq} outside {tol} of 0.05"
        );
    }

    #[test]
    fn nu_is_uniform_over_classes_and_avoids_training_cubes() {
        let world = TheoremWorld::new(5, 3, 0.2).unwrap();
        let mut r = rng::seeded(12);
        let mut counts = vec![0u64; 5];
        for _ in 0..10_000 {
            let (x, j) = world.sample_nu(&mut r);
            counts[j - 1] += 1;
            assert!(world.cube_contains(2, j, &x));
            for class in 1..=5 {
                assert!(!world.cube_contains(0, class, &x));
                assert!(!world.cube_contains(1, class, &x));
            }
        }
        let test = chi2_uniform(&counts, 0.01).unwrap();
        assert!(!test.reject, "nu class draw non-uniform: {test:?}");
    }

    #[test]
    fn detect_needs_at_least_as_many_draws_as_ncg() {
        let world = TheoremWorld::new(4, 2, 0.1).unwrap();
        let (_, records) = complexity_curve(&world, 50, 5, 21).unwrap();
        for rec in &records {
            assert!(rec.samples_to_detect >= rec.samples_to_ncg);
            assert!(rec.samples_to_ncg >= 4);
        }
    }

    #[test]
    fn snapshot_accuracy_is_perfect_when_classes_separate() {
        let world = TheoremWorld::new(3, 5, 0.2).unwrap();
        let (summary, records) = complexity_curve(&world, 30, 20, 33).unwrap();
        for rec in &records {
            assert_eq!(rec.nu_correct_fraction, 1.0);
        }
        assert_eq!(summary.mean_nu_correct_fraction, 1.0);
    }

    #[test]
    fn single_class_stopping_time_is_geometric() {
        let world = TheoremWorld::new(1, 1, 0.3).unwrap();
        let (summary, _) = complexity_curve(&world, 10_000, 1, 5).unwrap();
        let expected = 1.0 / 0.7;
        assert!(
            (summary.ncg.mean - expected).abs() <= 0.05 * expected,
            "mean {} vs geometric expectation {expected}",
            summary.ncg.mean
        );
        assert_eq!(summary.ncg.min, 1.0);
    }

    #[test]
    fn separation_bounds_match_closed_forms() {
        for dim in [1usize, 2, 5, 100] {
            let world = TheoremWorld::new(10, dim, 0.05).unwrap();
            let (max_same, min_diff) = separation_bounds(&world);
            let root_d = (dim as f64).sqrt();
            assert!((max_same - (17.0 + 8.0 / root_d).sqrt()).abs() < 1e-9);
            assert!((min_diff - (6.0 - 1.0 / root_d)).abs() < 1e-9);
        }
        let lone = TheoremWorld::new(1, 1, 0.05).unwrap();
        let (max_same, min_diff) = separation_bounds(&lone);
        assert!((max_same - 5.0).abs() < 1e-9);
        assert!(min_diff.is_infinite());
    }

    #[test]
    fn curves_are_deterministic_in_the_seed() {
        let world = TheoremWorld::new(3, 2, 0.1).unwrap();
        let (_, a) = complexity_curve(&world, 20, 10, 99).unwrap();
        let (_, b) = complexity_curve(&world, 20, 10, 99).unwrap();
        assert_eq!(a, b);
        let (_, c) = complexity_curve(&world, 20, 10, 100).unwrap();
        assert_ne!(
            a.iter().map(|r| r.samples_to_detect).collect::<Vec<_>>(),
            c.iter().map(|r| r.samples_to_detect).collect::<Vec<_>>()
        );
    }

    #[test]
    fn summary_quantiles_interpolate() {
        let s = StatSummary::from_values(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.q3, 3.25);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 4.0);
        assert!(StatSummary::from_values(&[]).is_err());
    }

    #[test]
    fn zero_arguments_are_rejected() {
        let world = TheoremWorld::new(2, 2, 0.1).unwrap();
        assert!(complexity_curve(&world, 0, 5, 1).is_err());
        let mut r = rng::seeded(1);
        assert!(trial(&world, &mut r, 0).is_err());
    }
}
