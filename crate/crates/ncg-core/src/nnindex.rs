//! Exact L2 nearest-neighbor queries by brute-force scan.
//!
//! Brute force is the semantic contract here: NCG admits no approximation
//! error, and the data sizes this crate targets make an `O(n·d)` scan per
//! query perfectly adequate. All distances are computed in f64. Ties are
//! broken by the smallest row index so results are reproducible.

use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{NcgError, Result};
use crate::linalg;

/// One nearest-neighbor answer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Row index of the nearest training point (smallest index on ties).
    pub row: usize,
    /// L2 distance to that point.
    pub distance: f64,
    /// That point's label.
    pub label: usize,
}

/// Read-only view over a dataset answering exact 1-NN queries.
pub struct NNIndex<'a> {
    ds: &'a LabeledDataset,
}

impl<'a> NNIndex<'a> {
    /// Wraps a dataset. No preprocessing is performed.
    pub fn new(ds: &'a LabeledDataset) -> Self {
        Self { ds }
    }

    /// The indexed dataset.
    pub fn dataset(&self) -> &LabeledDataset {
        self.ds
    }

    /// Nearest training point to `q`: minimal L2 distance, ties broken by
    /// smallest row index.
    pub fn nearest(&self, q: &[f64]) -> Result<Neighbor> {
        if q.len() != self.ds.dim() {
            return Err(NcgError::DimensionMismatch {
                expected: self.ds.dim(),
                got: q.len(),
            });
        }
        linalg::check_finite(q)?;
        let mut best_row = 0usize;
        let mut best_sq = f64::INFINITY;
        for (row, p) in self.ds.points.iter().enumerate() {
            let sq = linalg::dist_sq(q, p);
            if sq < best_sq {
                best_sq = sq;
                best_row = row;
            }
        }
        Ok(Neighbor {
            row: best_row,
            distance: best_sq.sqrt(),
            label: self.ds.labels[best_row],
        })
    }

    /// Elementwise `nearest` over a batch, order preserved. Queries run in
    /// parallel; results are collected back into input order.
    pub fn nearest_batch(&self, queries: &[Vec<f64>]) -> Result<Vec<Neighbor>> {
        queries
            .par_iter()
            .map(|q| self.nearest(q))
            .collect::<Result<Vec<_>>>()
    }

    /// Closest training point to row `i` among rows with a different label.
    /// Surfaces `ZeroMarginPair` defensively if a differently-labeled
    /// duplicate slipped past dataset validation.
    pub fn min_dist_diff_label(&self, i: usize) -> Result<(usize, f64)> {
        if i >= self.ds.n() {
            return Err(NcgError::ClassOutOfRange {
                index: i,
                class_count: self.ds.n(),
            });
        }
        if self.ds.class_count < 2 {
            return Err(NcgError::SingleClass);
        }
        let xi = &self.ds.points[i];
        let yi = self.ds.labels[i];
        let mut best: Option<(usize, f64)> = None;
        for (row, p) in self.ds.points.iter().enumerate() {
            if self.ds.labels[row] == yi {
                continue;
            }
            let sq = linalg::dist_sq(xi, p);
            if best.map_or(true, |(_, b)| sq < b) {
                best = Some((row, sq));
            }
        }
        let (row, sq) = best.ok_or(NcgError::SingleClass)?;
        if sq == 0.0 {
            return Err(NcgError::ZeroMarginPair { i, j: row });
        }
        Ok((row, sq.sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledDataset;
    use rand::Rng;

    fn two_point() -> LabeledDataset {
        LabeledDataset::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![0, 1],
            2,
            "two",
        )
        .unwrap()
    }

    #[test]
    fn nearest_two_point_geometry() {
        let ds = two_point();
        let index = NNIndex::new(&ds);
        let hit = index.nearest(&[0.3, 0.0]).unwrap();
        assert_eq!(hit.row, 0);
        assert!((hit.distance - 0.3).abs() < 1e-15);
        assert_eq!(hit.label, 0);
    }

    #[test]
    fn self_query_returns_own_row() {
        let mut rng = crate::rng::seeded(3);
        let points: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        let labels: Vec<usize> = (0..20).map(|i| i % 3).collect();
        let ds = LabeledDataset::new(points.clone(), labels.clone(), 3, "r").unwrap();
        let index = NNIndex::new(&ds);
        let hit = index.nearest(&points[5]).unwrap();
        assert_eq!(hit.row, 5);
        assert_eq!(hit.distance, 0.0);
        assert_eq!(hit.label, labels[5]);
    }

    #[test]
    fn tie_breaks_to_smallest_row() {
        let ds = LabeledDataset::new(
            vec![
                vec![9.0, 9.0],
                vec![9.5, 9.5],
                vec![-1.0, 0.0],
                vec![7.0, 7.0],
                vec![2.0, 2.0],
                vec![3.0, 3.0],
                vec![5.0, 5.0],
                vec![1.0, 0.0],
            ],
            vec![0, 0, 1, 0, 1, 0, 1, 1],
            2,
            "tie",
        )
        .unwrap();
        // Query (0,0) is equidistant (distance 1) from rows 2 and 7.
        let hit = NNIndex::new(&ds).nearest(&[0.0, 0.0]).unwrap();
        assert_eq!(hit.row, 2);
    }

    #[test]
    fn dimension_mismatch_and_nan_rejected() {
        let ds = two_point();
        let index = NNIndex::new(&ds);
        assert!(matches!(
            index.nearest(&[0.0]),
            Err(NcgError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            index.nearest(&[0.0, f64::NAN]),
            Err(NcgError::NonFiniteInput { .. })
        ));
    }

    #[test]
    fn batch_matches_sequential_and_permutes() {
        let mut rng = crate::rng::seeded(4);
        let points: Vec<Vec<f64>> = (0..500)
            .map(|_| (0..8).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let labels: Vec<usize> = (0..500).map(|i| i % 5).collect();
        let ds = LabeledDataset::new(points, labels, 5, "batch").unwrap();
        let index = NNIndex::new(&ds);
        let queries: Vec<Vec<f64>> = (0..1000)
            .map(|_| (0..8).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let batch = index.nearest_batch(&queries).unwrap();
        for (q, hit) in queries.iter().zip(&batch) {
            assert_eq!(*hit, index.nearest(q).unwrap());
        }
        // Permuting queries permutes results identically.
        let mut perm: Vec<usize> = (0..queries.len()).collect();
        perm.reverse();
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| queries[i].clone()).collect();
        let batch_p = index.nearest_batch(&permuted).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(batch_p[k], batch[i]);
        }
    }

    #[test]
    fn min_dist_diff_label_collinear() {
        let ds = LabeledDataset::new(
            vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![5.0, 0.0]],
            vec![0, 1, 1],
            2,
            "line",
        )
        .unwrap();
        let (row, dist) = NNIndex::new(&ds).min_dist_diff_label(0).unwrap();
        assert_eq!(row, 1);
        assert!((dist - 2.0).abs() < 1e-15);
    }

    #[test]
    fn min_dist_diff_label_single_class_errors() {
        let ds = LabeledDataset::new(vec![vec![0.0], vec![1.0]], vec![0, 0], 1, "one").unwrap();
        assert!(matches!(
            NNIndex::new(&ds).min_dist_diff_label(0),
            Err(NcgError::SingleClass)
        ));
    }

    #[test]
    fn nearest_is_global_minimum() {
        let mut rng = crate::rng::seeded(5);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let labels: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let ds = LabeledDataset::new(points.clone(), labels, 2, "min").unwrap();
        let index = NNIndex::new(&ds);
        for _ in 0..50 {
            let q: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0).collect();
            let hit = index.nearest(&q).unwrap();
            for p in &points {
                assert!(hit.distance <= crate::linalg::dist(&q, p) + 1e-12);
            }
        }
    }

    #[test]
    fn training_points_classify_as_themselves() {
        let ds = two_point();
        let index = NNIndex::new(&ds);
        for (i, p) in ds.points.iter().enumerate() {
            let hit = index.nearest(p).unwrap();
            assert_eq!(hit.distance, 0.0);
            assert_eq!(hit.label, ds.labels[i]);
        }
    }
}
