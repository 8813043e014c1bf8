//! NCG accuracy and the derived evaluation protocols: accuracy splits by
//! NCG agreement, distance binning, radius coverage, and histograms, plus
//! the JSON report that collects them.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::dataset::OODSet;
use crate::error::{NcgError, Result};
use crate::nnindex::NNIndex;
use crate::stats::TestResult;

/// Distance-binning mode: quantile bins of (almost) equal count, or equal-
/// width intervals over the distance range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinMode {
    EqualCount,
    EqualWidth,
}

impl std::str::FromStr for BinMode {
    type Err = NcgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal_count" => Ok(BinMode::EqualCount),
            "equal_width" => Ok(BinMode::EqualWidth),
            other => Err(NcgError::InvalidParameter {
                name: "bin_mode",
                why: format!("unknown mode `{other}` (expected equal_count or equal_width)"),
            }),
        }
    }
}

/// One row of a distance-binned NCG table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinRow {
    pub bin: usize,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mean_distance: Option<f64>,
    pub ncg_accuracy: Option<f64>,
}

/// Test accuracy split by NCG agreement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitByNcg {
    pub ncg_correct_count: usize,
    pub ncg_incorrect_count: usize,
    pub ncg_correct_test_acc: Option<f64>,
    pub ncg_incorrect_test_acc: Option<f64>,
}

/// A named statistical test inside a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedTest {
    pub name: String,
    #[serde(flatten)]
    pub result: TestResult,
}

/// One corruption level of an evaluation sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub level: u32,
    pub ncg_accuracy: f64,
    pub test_accuracy: Option<f64>,
}

/// Least-squares fits of the sweep accuracies against the level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSlopes {
    pub ncg_slope: f64,
    pub ncg_intercept: f64,
    pub test_slope: Option<f64>,
    pub test_intercept: Option<f64>,
}

/// Report provenance tags.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub dataset: String,
    pub source: String,
    pub seed: u64,
    pub method: String,
}

/// The full evaluation report. Every field a plot may draw from lives
/// here, so SVG emission is a pure view; `config` echoes the effective
/// run configuration so a report is sufficient to reproduce itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NCGReport {
    pub ncg_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub ncg_correct_count: Option<usize>,
    pub ncg_incorrect_count: Option<usize>,
    pub ncg_correct_test_acc: Option<f64>,
    pub ncg_incorrect_test_acc: Option<f64>,
    pub per_bin: Vec<BinRow>,
    pub coverage: Option<f64>,
    pub distance_histogram: Option<Histogram>,
    pub radius_histogram: Option<Histogram>,
    pub sweep: Option<Vec<SweepRow>>,
    pub sweep_slopes: Option<SweepSlopes>,
    pub tests: Vec<NamedTest>,
    pub metadata: ReportMetadata,
    #[serde(default)]
    pub config: serde_json::Value,
}

/// A standard equal-width histogram, optionally over log10 of the values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub log10: bool,
    pub counts: Vec<usize>,
}

fn check_ood(classifier: &dyn Classifier, index: &NNIndex, ood: &OODSet) -> Result<()> {
    if ood.m() == 0 {
        return Err(NcgError::EmptyDataset);
    }
    if classifier.class_count() != index.dataset().class_count {
        return Err(NcgError::LabelSpaceMismatch {
            classifier: classifier.class_count(),
            dataset: index.dataset().class_count,
        });
    }
    if classifier.input_dim() != index.dataset().dim() {
        return Err(NcgError::DimensionMismatch {
            expected: index.dataset().dim(),
            got: classifier.input_dim(),
        });
    }
    Ok(())
}

/// Per-point NCG agreement: does the classifier's prediction match the
/// nearest training label?
pub fn ncg_flags(
    classifier: &dyn Classifier,
    index: &NNIndex,
    ood: &OODSet,
) -> Result<Vec<bool>> {
    check_ood(classifier, index, ood)?;
    let neighbors = index.nearest_batch(&ood.points)?;
    ood.points
        .par_iter()
        .zip(&neighbors)
        .map(|(x, n)| Ok(classifier.predict(x)? == n.label))
        .collect()
}

/// Fraction of OOD points predicted as their nearest training label.
pub fn ncg_accuracy(
    classifier: &dyn Classifier,
    index: &NNIndex,
    ood: &OODSet,
) -> Result<f64> {
    let flags = ncg_flags(classifier, index, ood)?;
    Ok(flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
}

/// Semantic test accuracy on the NCG-correct and NCG-incorrect parts of an
/// OOD set with true labels. An empty part reports count 0 and no accuracy.
pub fn split_by_ncg(
    classifier: &dyn Classifier,
    index: &NNIndex,
    ood: &OODSet,
) -> Result<SplitByNcg> {
    let true_labels = ood.true_labels.as_ref().ok_or(NcgError::InvalidParameter {
        name: "ood",
        why: "split_by_ncg requires true labels".into(),
    })?;
    let flags = ncg_flags(classifier, index, ood)?;
    let mut counts = [0usize; 2];
    let mut hits = [0usize; 2];
    for ((x, &truth), &agree) in ood.points.iter().zip(true_labels).zip(&flags) {
        let part = usize::from(!agree);
        counts[part] += 1;
        if classifier.predict(x)? == truth {
            hits[part] += 1;
        }
    }
    let acc = |part: usize| {
        (counts[part] > 0).then(|| hits[part] as f64 / counts[part] as f64)
    };
    Ok(SplitByNcg {
        ncg_correct_count: counts[0],
        ncg_incorrect_count: counts[1],
        ncg_correct_test_acc: acc(0),
        ncg_incorrect_test_acc: acc(1),
    })
}

/// Semantic test accuracy against the OOD set's true labels.
pub fn test_accuracy(classifier: &dyn Classifier, ood: &OODSet) -> Result<f64> {
    let true_labels = ood.true_labels.as_ref().ok_or(NcgError::InvalidParameter {
        name: "ood",
        why: "test accuracy requires true labels".into(),
    })?;
    if ood.m() == 0 {
        return Err(NcgError::EmptyDataset);
    }
    let mut hits = 0usize;
    for (x, &truth) in ood.points.iter().zip(true_labels) {
        if classifier.predict(x)? == truth {
            hits += 1;
        }
    }
    Ok(hits as f64 / ood.m() as f64)
}

/// NCG accuracy and mean distance per distance-to-training bin.
pub fn bin_by_distance(
    classifier: &dyn Classifier,
    index: &NNIndex,
    ood: &OODSet,
    mode: BinMode,
    bins: usize,
) -> Result<Vec<BinRow>> {
    if bins == 0 {
        return Err(NcgError::InvalidParameter {
            name: "bins",
            why: "need at least one bin".into(),
        });
    }
    let flags = ncg_flags(classifier, index, ood)?;
    let neighbors = index.nearest_batch(&ood.points)?;
    let distances: Vec<f64> = neighbors.iter().map(|n| n.distance).collect();
    let m = distances.len();

    let assignment: Vec<Vec<usize>> = match mode {
        BinMode::EqualCount => {
            if m < bins {
                return Err(NcgError::InvalidParameter {
                    name: "bins",
                    why: format!("equal_count needs at least {bins} points, got {m}"),
                });
            }
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                distances[a]
                    .partial_cmp(&distances[b])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let base = m / bins;
            let remainder = m % bins;
            let mut out = Vec::with_capacity(bins);
            let mut cursor = 0;
            for bin in 0..bins {
                let size = base + usize::from(bin < remainder);
                out.push(order[cursor..cursor + size].to_vec());
                cursor += size;
            }
            out
        }
        BinMode::EqualWidth => {
            let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
            let max = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let width = (max - min) / bins as f64;
            let mut out = vec![Vec::new(); bins];
            for (i, &d) in distances.iter().enumerate() {
                let bin = if width > 0.0 {
                    (((d - min) / width) as usize).min(bins - 1)
                } else {
                    0
                };
                out[bin].push(i);
            }
            out
        }
    };

    let mut rows = Vec::with_capacity(bins);
    for (bin, members) in assignment.iter().enumerate() {
        let count = members.len();
        let (lo, hi) = match mode {
            BinMode::EqualCount => {
                let lo = members.first().map_or(f64::NAN, |&i| distances[i]);
                let hi = members.last().map_or(f64::NAN, |&i| distances[i]);
                (lo, hi)
            }
            BinMode::EqualWidth => {
                let min = distances.iter().copied().fold(f64::INFINITY, f64::min);
                let max = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let width = (max - min) / bins as f64;
                (min + bin as f64 * width, min + (bin + 1) as f64 * width)
            }
        };
        let mean_distance = (count > 0)
            .then(|| members.iter().map(|&i| distances[i]).sum::<f64>() / count as f64);
        let ncg_accuracy = (count > 0)
            .then(|| members.iter().filter(|&&i| flags[i]).count() as f64 / count as f64);
        rows.push(BinRow {
            bin,
            lo,
            hi,
            count,
            mean_distance,
            ncg_accuracy,
        });
    }
    Ok(rows)
}

/// Fraction of OOD points within the supplied radius of their nearest
/// training row, over the points whose nearest row has a radius entry.
pub fn coverage_within_radius(
    index: &NNIndex,
    ood: &OODSet,
    radii: &HashMap<usize, f64>,
) -> Result<f64> {
    if ood.m() == 0 {
        return Err(NcgError::EmptyDataset);
    }
    let neighbors = index.nearest_batch(&ood.points)?;
    let mut included = 0usize;
    let mut covered = 0usize;
    for n in &neighbors {
        if let Some(&radius) = radii.get(&n.row) {
            included += 1;
            if n.distance <= radius {
                covered += 1;
            }
        }
    }
    if included == 0 {
        return Err(NcgError::EmptyDataset);
    }
    Ok(covered as f64 / included as f64)
}

/// Equal-width histogram of `values`, optionally in log10.
pub fn distance_histogram(values: &[f64], log_scale: bool, bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(NcgError::EmptyDataset);
    }
    if bins == 0 {
        return Err(NcgError::InvalidParameter {
            name: "bins",
            why: "need at least one bin".into(),
        });
    }
    let transformed: Vec<f64> = if log_scale {
        values
            .iter()
            .map(|&v| {
                if v <= 0.0 {
                    Err(NcgError::InvalidParameter {
                        name: "values",
                        why: format!("log-scale histogram needs positive values, got {v}"),
                    })
                } else {
                    Ok(v.log10())
                }
            })
            .collect::<Result<_>>()?
    } else {
        values.to_vec()
    };
    let lo = transformed.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = transformed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &transformed {
        let bin = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[bin] += 1;
    }
    Ok(Histogram {
        lo,
        hi,
        log10: log_scale,
        counts,
    })
}

/// Per-bin table as CSV (empty cells where a bin is empty).
pub fn bins_to_csv(rows: &[BinRow]) -> String {
    let mut out = String::from("bin,lo,hi,count,mean_distance,ncg_accuracy\n");
    for row in rows {
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.bin,
            row.lo,
            row.hi,
            row.count,
            fmt(row.mean_distance),
            fmt(row.ncg_accuracy),
        ));
    }
    out
}
