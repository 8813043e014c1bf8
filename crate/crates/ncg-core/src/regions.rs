//! The four smoothness regions: uniform balls, non-uniform balls, fitted
//! ellipsoids, and sub-Voronoi half-space cells. Each region is anchored at
//! a training point and supports membership, projection, and PGD step
//! sizing.

use serde::Serialize;

use crate::dataset::LabeledDataset;
use crate::error::{NcgError, Result};
use crate::linalg;
use crate::nnindex::NNIndex;
use crate::rng::{self, STREAM_REGION};

/// Membership slack for all region predicates.
pub const REGION_TOL: f64 = 1e-9;
/// Fixed iteration count for segment bisection (2⁻³⁰ relative precision).
const BISECT_ITERS: usize = 30;

/// Shape parameters of a region, exclusive of its anchor.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum RegionVariant {
    /// L2 ball of fixed radius `r`.
    UniformBall { r: f64 },
    /// L2 ball whose radius cap is `λ · ½ · (distance to the closest
    /// differently-labeled training point)`.
    NonUniformBall { eps_max: f64, lambda: f64 },
    /// Ellipsoid spanned by principal directions of nearby
    /// differently-labeled points: `Σ ((v_m·(x−x_i))/a_m)² ≤ 1`.
    Ellipsoid {
        axes: Vec<Vec<f64>>,
        scales: Vec<f64>,
    },
    /// Intersection of shrunk bisector half-spaces `w_j·x ≤ b_j`.
    SubVoronoi {
        halfspaces: Vec<(Vec<f64>, f64)>,
        lambda: f64,
    },
}

/// A region anchored at training row `anchor` with point `x_i`.
#[derive(Debug, Clone, Serialize)]
pub struct RegionSpec {
    /// Training row index of the anchor.
    pub anchor: usize,
    /// Anchor coordinates `x_i`.
    pub x_i: Vec<f64>,
    /// Shape of the region.
    pub variant: RegionVariant,
}

impl RegionSpec {
    /// Builds a region and verifies that the anchor is a member and the
    /// shape parameters are valid (positive radii and scales, orthonormal
    /// ellipsoid axes, anchor-feasible half-spaces).
    pub fn new(anchor: usize, x_i: Vec<f64>, variant: RegionVariant) -> Result<Self> {
        let d = x_i.len();
        match &variant {
            RegionVariant::UniformBall { r } => {
                if !(*r > 0.0) {
                    return Err(NcgError::InvalidParameter {
                        name: "r",
                        why: format!("radius must be positive, got {r}"),
                    });
                }
            }
            RegionVariant::NonUniformBall { eps_max, lambda } => {
                if !(*eps_max > 0.0) {
                    return Err(NcgError::InvalidParameter {
                        name: "eps_max",
                        why: format!("radius cap must be positive, got {eps_max}"),
                    });
                }
                check_lambda(*lambda)?;
            }
            RegionVariant::Ellipsoid { axes, scales } => {
                if axes.len() != scales.len() || axes.is_empty() {
                    return Err(NcgError::InvalidParameter {
                        name: "axes",
                        why: "axes and scales must be non-empty and equal length".into(),
                    });
                }
                for (m, s) in scales.iter().enumerate() {
                    if !(*s > 0.0) {
                        return Err(NcgError::DegenerateSpectrum { index: m });
                    }
                }
                for (m, v) in axes.iter().enumerate() {
                    if v.len() != d {
                        return Err(NcgError::DimensionMismatch {
                            expected: d,
                            got: v.len(),
                        });
                    }
                    if (linalg::norm(v) - 1.0).abs() > 1e-9 {
                        return Err(NcgError::InvalidParameter {
                            name: "axes",
                            why: format!("direction {m} is not unit length"),
                        });
                    }
                    for w in axes.iter().take(m) {
                        if linalg::dot(v, w).abs() > 1e-9 {
                            return Err(NcgError::InvalidParameter {
                                name: "axes",
                                why: "directions are not orthonormal".into(),
                            });
                        }
                    }
                }
            }
            RegionVariant::SubVoronoi { halfspaces, lambda } => {
                if halfspaces.is_empty() {
                    return Err(NcgError::InvalidParameter {
                        name: "halfspaces",
                        why: "at least one half-space required".into(),
                    });
                }
                check_lambda(*lambda)?;
                for (w, b) in halfspaces {
                    if w.len() != d {
                        return Err(NcgError::DimensionMismatch {
                            expected: d,
                            got: w.len(),
                        });
                    }
                    if linalg::dot(w, &x_i) > *b + REGION_TOL {
                        return Err(NcgError::AnchorOutsideRegion);
                    }
                }
            }
        }
        Ok(Self { anchor, x_i, variant })
    }

    /// Region dimension.
    pub fn dim(&self) -> usize {
        self.x_i.len()
    }

    /// Membership test with `REGION_TOL` slack.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(NcgError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match &self.variant {
            RegionVariant::UniformBall { r } => linalg::dist(x, &self.x_i) <= r + REGION_TOL,
            RegionVariant::NonUniformBall { eps_max, .. } => {
                linalg::dist(x, &self.x_i) <= eps_max + REGION_TOL
            }
            RegionVariant::Ellipsoid { axes, scales } => {
                let diff = linalg::sub(x, &self.x_i);
                let q: f64 = axes
                    .iter()
                    .zip(scales)
                    .map(|(v, a)| {
                        let t = linalg::dot(v, &diff) / a;
                        t * t
                    })
                    .sum();
                q <= 1.0 + REGION_TOL
            }
            RegionVariant::SubVoronoi { halfspaces, .. } => halfspaces
                .iter()
                .all(|(w, b)| linalg::dot(w, x) <= b + REGION_TOL),
        })
    }

    /// Projects `x` into the region. Balls use the exact radial closed
    /// form; ellipsoids and sub-Voronoi cells bisect the segment `[x_i, x]`
    /// and return the largest-`t` contained point, which is where Appendix-
    /// style PGD snaps an escaped iterate back to.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(NcgError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match &self.variant {
            RegionVariant::UniformBall { r } | RegionVariant::NonUniformBall { eps_max: r, .. } => {
                let dist = linalg::dist(x, &self.x_i);
                if dist <= *r {
                    return Ok(x.to_vec());
                }
                let scale = r / dist;
                Ok(self
                    .x_i
                    .iter()
                    .zip(x)
                    .map(|(c, v)| c + scale * (v - c))
                    .collect())
            }
            _ => {
                if self.contains(x)? {
                    return Ok(x.to_vec());
                }
                if !self.contains(&self.x_i)? {
                    return Err(NcgError::AnchorOutsideRegion);
                }
                let delta = linalg::sub(x, &self.x_i);
                let mut lo = 0.0f64;
                let mut hi = 1.0f64;
                for _ in 0..BISECT_ITERS {
                    let mid = 0.5 * (lo + hi);
                    let candidate = linalg::axpy(&self.x_i, mid, &delta);
                    if self.contains(&candidate)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(linalg::axpy(&self.x_i, lo, &delta))
            }
        }
    }

    /// PGD step size: the region's characteristic reach divided by 5.
    /// For non-uniform balls the trainer passes the current ε via
    /// [`RegionSpec::pgd_step_size_at`]; this method uses the cap.
    pub fn pgd_step_size(&self) -> f64 {
        match &self.variant {
            RegionVariant::UniformBall { r } => r / 5.0,
            RegionVariant::NonUniformBall { eps_max, .. } => eps_max / 5.0,
            RegionVariant::Ellipsoid { scales, .. } => {
                scales.iter().copied().fold(0.0, f64::max) / 5.0
            }
            RegionVariant::SubVoronoi { halfspaces, .. } => {
                halfspaces
                    .iter()
                    .map(|(w, b)| (b - linalg::dot(w, &self.x_i)) / linalg::norm(w))
                    .fold(0.0, f64::max)
                    / 5.0
            }
        }
    }

    /// Step size for a non-uniform ball at its current ramped radius.
    pub fn pgd_step_size_at(&self, eps_current: f64) -> f64 {
        match &self.variant {
            RegionVariant::NonUniformBall { .. } => eps_current / 5.0,
            _ => self.pgd_step_size(),
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(NcgError::InvalidParameter {
            name: "lambda",
            why: format!("shrinkage must lie in (0, 1], got {lambda}"),
        });
    }
    Ok(())
}

/// Radius of the non-uniform ball at anchor `i`:
/// `λ · ½ · min_dist_diff_label(i)`.
pub fn nonuniform_radius(index: &NNIndex, i: usize, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let (_, dist) = index.min_dist_diff_label(i)?;
    Ok(lambda * 0.5 * dist)
}

/// Builds the non-uniform ball region at anchor `i`.
pub fn build_nonuniform_ball(index: &NNIndex, i: usize, lambda: f64) -> Result<RegionSpec> {
    let eps_max = nonuniform_radius(index, i, lambda)?;
    RegionSpec::new(
        i,
        index.dataset().points[i].clone(),
        RegionVariant::NonUniformBall { eps_max, lambda },
    )
}

/// Fits the ellipsoid region at anchor `i` from its `k` nearest
/// differently-labeled points.
///
/// The principal directions are those of the k points after subtracting
/// `x_i` (the ellipsoid is centered at the anchor, so its axes are too).
/// The top `k/2` directions and singular values are kept; `λ_i` is then
/// binary-searched over `[1, 500]` (30 iterations) for the largest value
/// whose ellipsoid `Σ ((v_m·(x−x_i))/(λ_i·s_m))² ≤ 1` contains at most
/// `⌊0.05·k⌋` of the k points, and finally halved so neighboring
/// ellipsoids stay clear of each other. Semi-axes are `a_m = λ_i·s_m`.
pub fn fit_ellipsoid(ds: &LabeledDataset, i: usize, k: usize) -> Result<RegionSpec> {
    if k < 2 || k % 2 != 0 {
        return Err(NcgError::InvalidParameter {
            name: "k",
            why: format!("k must be even and at least 2, got {k}"),
        });
    }
    let x_i = &ds.points[i];
    let y_i = ds.labels[i];
    let mut candidates: Vec<(f64, usize)> = ds
        .points
        .iter()
        .zip(&ds.labels)
        .enumerate()
        .filter(|(_, (_, &l))| l != y_i)
        .map(|(row, (p, _))| (linalg::dist_sq(x_i, p), row))
        .collect();
    if candidates.len() < k {
        return Err(NcgError::InvalidParameter {
            name: "k",
            why: format!(
                "need {k} differently-labeled points, found {}",
                candidates.len()
            ),
        });
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sample: Vec<Vec<f64>> = candidates
        .iter()
        .take(k)
        .map(|&(_, row)| linalg::sub(&ds.points[row], x_i))
        .collect();
    let pairs = linalg::top_singular_pairs(&sample, k / 2)?;
    for (m, (s, _)) in pairs.iter().enumerate() {
        if !(*s > 0.0) {
            return Err(NcgError::DegenerateSpectrum { index: m });
        }
    }
    let budget = (0.05 * k as f64).floor() as usize;
    let contained_count = |lambda: f64| -> usize {
        sample
            .iter()
            .filter(|diff| {
                let q: f64 = pairs
                    .iter()
                    .map(|(s, v)| {
                        let t = linalg::dot(v, diff) / (lambda * s);
                        t * t
                    })
                    .sum();
                q <= 1.0 + REGION_TOL
            })
            .count()
    };
    // The predicate "contains at most budget points" is monotone: it holds
    // below some threshold λ* and fails above. Bisect for the largest
    // feasible λ, falling back to the range floor if even λ=1 over-covers.
    let mut lambda = if contained_count(1.0) > budget {
        1.0
    } else if contained_count(500.0) <= budget {
        500.0
    } else {
        let mut lo = 1.0f64;
        let mut hi = 500.0f64;
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (lo + hi);
            if contained_count(mid) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    lambda /= 2.0;
    let (scales, axes): (Vec<f64>, Vec<Vec<f64>>) =
        pairs.into_iter().map(|(s, v)| (lambda * s, v)).unzip();
    RegionSpec::new(i, x_i.clone(), RegionVariant::Ellipsoid { axes, scales })
}

/// Builds the sub-Voronoi region at anchor `i` from a uniform subsample of
/// differently-labeled points.
///
/// Each sampled `x_j` contributes the bisector half-space `w_j·x ≤ b_j`
/// with `w_j = x_j − x_i` and raw offset `w_j·(x_i+x_j)/2`; shrinkage
/// interpolates the offset toward the anchor,
/// `b_j = w_j·x_i + λ·(b_raw − w_j·x_i)`, so λ=1 is the true bisector and
/// λ→0 collapses the cell onto `x_i`.
pub fn build_subvoronoi(
    ds: &LabeledDataset,
    i: usize,
    m_samples: usize,
    lambda: f64,
    seed: u64,
) -> Result<RegionSpec> {
    check_lambda(lambda)?;
    if ds.class_count < 2 {
        return Err(NcgError::SingleClass);
    }
    let x_i = &ds.points[i];
    let y_i = ds.labels[i];
    let diff_rows: Vec<usize> = (0..ds.n()).filter(|&row| ds.labels[row] != y_i).collect();
    if diff_rows.is_empty() {
        return Err(NcgError::SingleClass);
    }
    let take = m_samples.min(diff_rows.len());
    let mut rng = rng::item_stream(seed, i as u64, STREAM_REGION);
    let chosen = rand::seq::index::sample(&mut rng, diff_rows.len(), take);
    let mut halfspaces = Vec::with_capacity(take);
    for sel in chosen.iter() {
        let x_j = &ds.points[diff_rows[sel]];
        let w = linalg::sub(x_j, x_i);
        let w_dot_xi = linalg::dot(&w, x_i);
        let b_raw = w
            .iter()
            .zip(x_i.iter().zip(x_j))
            .map(|(wc, (a, b))| wc * 0.5 * (a + b))
            .sum::<f64>();
        let b = w_dot_xi + lambda * (b_raw - w_dot_xi);
        halfspaces.push((w, b));
    }
    RegionSpec::new(
        i,
        x_i.clone(),
        RegionVariant::SubVoronoi { halfspaces, lambda },
    )
}

/// Builds the uniform ball region at anchor `i`.
pub fn build_uniform_ball(ds: &LabeledDataset, i: usize, r: f64) -> Result<RegionSpec> {
    RegionSpec::new(i, ds.points[i].clone(), RegionVariant::UniformBall { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledDataset;
    use rand::Rng;

    fn line_ds() -> LabeledDataset {
        LabeledDataset::new(
            vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![5.0, 0.0]],
            vec![0, 1, 1],
            2,
            "line",
        )
        .unwrap()
    }

    #[test]
    fn nonuniform_radius_halves_distance() {
        let ds = line_ds();
        let index = NNIndex::new(&ds);
        assert!((nonuniform_radius(&index, 0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((nonuniform_radius(&index, 0, 0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ball_membership_and_projection() {
        let region = RegionSpec::new(
            0,
            vec![0.0, 0.0],
            RegionVariant::UniformBall { r: 1.0 },
        )
        .unwrap();
        assert!(region.contains(&[0.5, 0.0]).unwrap());
        assert!(!region.contains(&[1.5, 0.0]).unwrap());
        let p = region.project(&[3.0, 4.0]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-12 && (p[1] - 0.8).abs() < 1e-12);
        let inside = region.project(&[0.25, -0.25]).unwrap();
        assert_eq!(inside, vec![0.25, -0.25]);
    }

    #[test]
    fn ellipsoid_membership_boundary() {
        let region = RegionSpec::new(
            0,
            vec![0.0, 0.0],
            RegionVariant::Ellipsoid {
                axes: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                scales: vec![2.0, 1.0],
            },
        )
        .unwrap();
        assert!(region.contains(&[2.0, 0.0]).unwrap());
        assert!(!region.contains(&[0.0, 1.01]).unwrap());
        assert!((region.pgd_step_size() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn subvoronoi_single_halfspace() {
        let ds = LabeledDataset::new(
            vec![vec![0.0, 0.0], vec![2.0, 0.0]],
            vec![0, 1],
            2,
            "pair",
        )
        .unwrap();
        let region = build_subvoronoi(&ds, 0, 5, 1.0, 0).unwrap();
        // Bisector of (0,0) and (2,0): first coordinate ≤ 1.
        assert!(region.contains(&[0.99, 5.0]).unwrap());
        assert!(!region.contains(&[1.01, 0.0]).unwrap());
        assert!((region.pgd_step_size() - 0.2).abs() < 1e-12);

        let shrunk = build_subvoronoi(&ds, 0, 5, 0.5, 0).unwrap();
        assert!(shrunk.contains(&[0.49, 0.0]).unwrap());
        assert!(!shrunk.contains(&[0.51, 0.0]).unwrap());
    }

    #[test]
    fn subvoronoi_projection_hits_hyperplane() {
        let ds = LabeledDataset::new(
            vec![vec![0.0, 0.0], vec![2.0, 0.0]],
            vec![0, 1],
            2,
            "pair",
        )
        .unwrap();
        let region = build_subvoronoi(&ds, 0, 1, 1.0, 0).unwrap();
        let p = region.project(&[2.0, 0.0]).unwrap();
        assert!((p[0] - 1.0).abs() < 4e-9, "projection {p:?} off the bisector");
        assert!(p[1].abs() < 1e-15);
    }

    #[test]
    fn subvoronoi_full_region_excludes_diff_labels_includes_near_points() {
        let mut rng = crate::rng::seeded(12);
        let points: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..2).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
            .collect();
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let ds = LabeledDataset::new(points.clone(), labels.clone(), 3, "vor").unwrap();
        for i in 0..ds.n() {
            let region = build_subvoronoi(&ds, i, usize::MAX, 1.0, 7).unwrap();
            // Every differently-labeled training point is excluded.
            for (row, p) in points.iter().enumerate() {
                if labels[row] != labels[i] {
                    assert!(
                        !region.contains(p).unwrap()
                            || crate::linalg::dist(p, &points[i]) < 1e-12,
                        "diff-labeled point {row} inside cell of {i}"
                    );
                }
            }
            // Points strictly closer to x_i than to all diff-labeled points
            // are included.
            for _ in 0..30 {
                let q: Vec<f64> = (0..2).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
                let d_i = crate::linalg::dist(&q, &points[i]);
                let strictly_closer = points
                    .iter()
                    .zip(&labels)
                    .filter(|(_, &l)| l != labels[i])
                    .all(|(p, _)| d_i < crate::linalg::dist(&q, p));
                if strictly_closer {
                    assert!(region.contains(&q).unwrap());
                }
            }
        }
    }

    #[test]
    fn nonuniform_ball_sits_inside_subvoronoi_cell() {
        let mut rng = crate::rng::seeded(21);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random::<f64>() * 2.0).collect())
            .collect();
        let labels: Vec<usize> = (0..40).map(|i| (i / 5) % 2).collect();
        let ds = LabeledDataset::new(points.clone(), labels, 2, "ball-in-cell").unwrap();
        let index = NNIndex::new(&ds);
        for i in (0..ds.n()).step_by(4) {
            let r = nonuniform_radius(&index, i, 1.0).unwrap();
            let cell = build_subvoronoi(&ds, i, usize::MAX, 1.0, 3).unwrap();
            for _ in 0..250 {
                // Uniform direction, radius scaled to stay inside the ball.
                let dir: Vec<f64> = (0..3)
                    .map(|_| rng.random::<f64>() * 2.0 - 1.0)
                    .collect();
                let n = crate::linalg::norm(&dir).max(1e-12);
                let scale = r * rng.random::<f64>() / n;
                let q = crate::linalg::axpy(&points[i], scale, &dir);
                assert!(cell.contains(&q).unwrap());
            }
        }
    }

    #[test]
    fn shrinkage_is_monotone() {
        let ds = line_ds();
        let mut rng = crate::rng::seeded(9);
        let big = build_subvoronoi(&ds, 0, 5, 0.9, 1).unwrap();
        let small = build_subvoronoi(&ds, 0, 5, 0.45, 1).unwrap();
        for _ in 0..1000 {
            let q: Vec<f64> = (0..2).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            if small.contains(&q).unwrap() {
                assert!(big.contains(&q).unwrap());
            }
        }
    }

    #[test]
    fn fit_ellipsoid_cross_pattern() {
        let ds = LabeledDataset::new(
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
            vec![0, 1, 1, 1, 1],
            2,
            "cross",
        )
        .unwrap();
        let region = fit_ellipsoid(&ds, 0, 4).unwrap();
        let RegionVariant::Ellipsoid { axes, scales } = &region.variant else {
            panic!("expected ellipsoid");
        };
        assert_eq!(axes.len(), 2);
        // Data-matrix singular values are both √2. Even λ=1 captures all
        // four samples (they sit at quadratic form 1/2), so the search
        // floors at λ=1 and the final halving gives semi-axes 0.5·√2.
        let expected = 0.5 * 2.0f64.sqrt();
        for s in scales {
            assert!((s - expected).abs() < 1e-9, "semi-axis {s} vs {expected}");
        }
        for v in axes {
            let aligned = v[0].abs() > 0.999 || v[1].abs() > 0.999;
            assert!(aligned, "direction {v:?} not axis-aligned");
        }
        assert!(region.contains(&region.x_i.clone()).unwrap());
        // None of the four sample points ends up inside the final region.
        for p in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            assert!(!region.contains(&p).unwrap());
        }
    }

    #[test]
    fn fit_ellipsoid_rejects_scarce_samples() {
        let ds = line_ds();
        assert!(matches!(
            fit_ellipsoid(&ds, 0, 4),
            Err(NcgError::InvalidParameter { .. })
        ));
    }

    #[test]
    fn fit_ellipsoid_degenerate_spectrum() {
        // All diff-labeled points on a line through x_i: second singular
        // value is zero.
        let ds = LabeledDataset::new(
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![2.0, 0.0],
                vec![3.0, 0.0],
                vec![4.0, 0.0],
            ],
            vec![0, 1, 1, 1, 1],
            2,
            "degenerate",
        )
        .unwrap();
        assert!(matches!(
            fit_ellipsoid(&ds, 0, 4),
            Err(NcgError::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn anchor_is_member_of_every_variant() {
        let mut rng = crate::rng::seeded(17);
        let points: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..2).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect())
            .collect();
        let labels: Vec<usize> = (0..60).map(|i| i % 2).collect();
        let ds = LabeledDataset::new(points, labels, 2, "anchors").unwrap();
        let index = NNIndex::new(&ds);
        for i in (0..ds.n()).step_by(7) {
            let regions = [
                build_uniform_ball(&ds, i, 0.5).unwrap(),
                build_nonuniform_ball(&index, i, 1.0).unwrap(),
                fit_ellipsoid(&ds, i, 4).unwrap(),
                build_subvoronoi(&ds, i, 10, 1.0, 5).unwrap(),
            ];
            for region in &regions {
                assert!(region.contains(&ds.points[i]).unwrap());
            }
        }
    }

    #[test]
    fn step_sizes_follow_fifth_rule() {
        let ball = RegionSpec::new(0, vec![0.0], RegionVariant::UniformBall { r: 2.0 }).unwrap();
        assert!((ball.pgd_step_size() - 0.4).abs() < 1e-15);
        let nub = RegionSpec::new(
            0,
            vec![0.0],
            RegionVariant::NonUniformBall {
                eps_max: 1.0,
                lambda: 1.0,
            },
        )
        .unwrap();
        assert!((nub.pgd_step_size_at(0.3) - 0.06).abs() < 1e-15);
    }

    #[test]
    fn projection_is_feasible_and_collinear() {
        let mut rng = crate::rng::seeded(33);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..2).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
            .collect();
        let labels: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let ds = LabeledDataset::new(points, labels, 2, "proj").unwrap();
        for i in (0..ds.n()).step_by(5) {
            let region = build_subvoronoi(&ds, i, 20, 1.0, 2).unwrap();
            for _ in 0..50 {
                let x: Vec<f64> = (0..2).map(|_| rng.random::<f64>() * 8.0 - 4.0).collect();
                let p = region.project(&x).unwrap();
                assert!(region.contains(&p).unwrap());
                // p = x_i + t (x − x_i): cross-product residual is zero.
                let u = crate::linalg::sub(&p, &region.x_i);
                let v = crate::linalg::sub(&x, &region.x_i);
                let cross = u[0] * v[1] - u[1] * v[0];
                assert!(cross.abs() < 1e-9 * crate::linalg::norm(&v).max(1.0));
            }
        }
    }
}
