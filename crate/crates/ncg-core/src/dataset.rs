//! Labeled vector datasets: representation, file I/O, held-out-class
//! splitting, and the synthetic generators used by the evaluation suite.

use std::collections::HashMap;
use std::fs;
use std::io::{Read as _, Write as _};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{NcgError, Result};
use crate::rng::{self, STREAM_GEN};

/// A labeled point set with a contiguous label space `[0, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    /// `n × d` coordinates.
    pub points: Vec<Vec<f64>>,
    /// One label in `[0, class_count)` per row.
    pub labels: Vec<usize>,
    /// Number of classes `C`.
    pub class_count: usize,
    /// Human-readable tag carried into reports.
    pub name: String,
}

/// A set of out-of-distribution query points.
#[derive(Debug, Clone, PartialEq)]
pub struct OODSet {
    /// `m × d` coordinates.
    pub points: Vec<Vec<f64>>,
    /// Semantic labels, when the OOD set has them (corrupted in-distribution
    /// data). Absent for unseen-class sets.
    pub true_labels: Option<Vec<usize>>,
    /// Provenance tag: held-out class name or corruption descriptor.
    pub source: String,
}

impl LabeledDataset {
    /// Builds a dataset and checks every structural invariant: matching row
    /// widths, labels within `[0, C)`, every class populated, and no pair of
    /// identical points with different labels.
    pub fn new(
        points: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_count: usize,
        name: impl Into<String>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(NcgError::EmptyDataset);
        }
        let d = points[0].len();
        if d == 0 {
            return Err(NcgError::InconsistentDimension {
                row: 0,
                expected: 1,
                got: 0,
            });
        }
        for (row, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(NcgError::InconsistentDimension {
                    row,
                    expected: d,
                    got: p.len(),
                });
            }
        }
        if labels.len() != points.len() {
            return Err(NcgError::InconsistentDimension {
                row: labels.len(),
                expected: points.len(),
                got: labels.len(),
            });
        }
        let mut seen = vec![false; class_count];
        for &label in &labels {
            if label >= class_count {
                return Err(NcgError::LabelOutOfRange {
                    label: label as i64,
                    class_count,
                });
            }
            seen[label] = true;
        }
        if let Some(class) = seen.iter().position(|s| !s) {
            return Err(NcgError::MissingClass { class });
        }
        check_cross_label_duplicates(&points, &labels)?;
        Ok(Self {
            points,
            labels,
            class_count,
            name: name.into(),
        })
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Coordinate dimension.
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

impl OODSet {
    /// Builds an OOD set, requiring at least one point and consistent widths.
    pub fn new(
        points: Vec<Vec<f64>>,
        true_labels: Option<Vec<usize>>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(NcgError::EmptyDataset);
        }
        let d = points[0].len();
        for (row, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(NcgError::InconsistentDimension {
                    row,
                    expected: d,
                    got: p.len(),
                });
            }
        }
        if let Some(labels) = &true_labels {
            if labels.len() != points.len() {
                return Err(NcgError::InconsistentDimension {
                    row: labels.len(),
                    expected: points.len(),
                    got: labels.len(),
                });
            }
        }
        Ok(Self {
            points,
            true_labels,
            source: source.into(),
        })
    }

    /// Number of rows.
    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// Coordinate dimension.
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

/// Detects identical coordinate vectors carrying different labels.
/// Keyed on exact bit patterns (with `-0.0` normalized to `0.0`) so the
/// scan stays linear in `n`.
fn check_cross_label_duplicates(points: &[Vec<f64>], labels: &[usize]) -> Result<()> {
    let mut first_by_key: HashMap<Vec<u64>, usize> = HashMap::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let key: Vec<u64> = p.iter().map(|&v| (v + 0.0).to_bits()).collect();
        match first_by_key.entry(key) {
            std::collections::hash_map::Entry::Occupied(entry) => {
                let j = *entry.get();
                if labels[j] != labels[i] {
                    return Err(NcgError::ZeroMarginPair { i: j, j: i });
                }
            }
            std::collections::hash_map::Entry::Vacant(entry) => {
                entry.insert(i);
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// On-disk encodings for datasets and OOD sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    /// Headerless `label,f0,f1,...` rows.
    Csv,
    /// Magic `NCG1`, little-endian u32 `n`/`d`/`C`, then `n` records of
    /// (i32 label, d × f32 coordinates).
    Binary,
}

impl std::str::FromStr for FileFormat {
    type Err = NcgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(FileFormat::Csv),
            "binary" => Ok(FileFormat::Binary),
            other => Err(NcgError::InvalidParameter {
                name: "format",
                why: format!("unknown format `{other}` (expected csv or binary)"),
            }),
        }
    }
}

const BINARY_MAGIC: &[u8; 4] = b"NCG1";

fn io_err(path: &Path, source: std::io::Error) -> NcgError {
    NcgError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> NcgError {
    NcgError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Loads a dataset from `path` in the given format. CSV class counts are
/// inferred as `max label + 1`; the binary format declares its own.
pub fn load_dataset(path: &Path, format: FileFormat) -> Result<LabeledDataset> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    match format {
        FileFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            let (points, labels) = parse_csv(path, &text)?;
            let class_count = labels.iter().copied().max().map_or(0, |m| m + 1);
            LabeledDataset::new(points, labels, class_count, name)
        }
        FileFormat::Binary => {
            let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
            let (points, labels, class_count) = parse_binary(path, &bytes)?;
            LabeledDataset::new(points, labels, class_count, name)
        }
    }
}

/// Writes a dataset to `path` in the given format.
pub fn save_dataset(ds: &LabeledDataset, path: &Path, format: FileFormat) -> Result<()> {
    let bytes = match format {
        FileFormat::Csv => encode_csv(&ds.points, &ds.labels).into_bytes(),
        FileFormat::Binary => encode_binary(&ds.points, &ds.labels, ds.class_count),
    };
    write_atomic(path, &bytes)
}

/// Loads an OOD set. Labels present in the file are kept as `true_labels`;
/// a CSV row may use label `-1` (or any negative) to mark "no label", and
/// the binary format uses negative i32 labels the same way. A file is
/// either fully labeled or fully unlabeled.
pub fn load_ood(path: &Path, format: FileFormat) -> Result<OODSet> {
    let source = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "ood".into());
    let (points, raw_labels) = match format {
        FileFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            parse_csv_raw(path, &text)?
        }
        FileFormat::Binary => {
            let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
            let (points, labels, _) = parse_binary_raw(path, &bytes)?;
            (points, labels)
        }
    };
    let labeled = raw_labels.iter().all(|&l| l >= 0);
    let unlabeled = raw_labels.iter().all(|&l| l < 0);
    if !labeled && !unlabeled {
        return Err(parse_err(
            path,
            0,
            "OOD file mixes labeled and unlabeled rows",
        ));
    }
    let true_labels = if labeled {
        Some(raw_labels.iter().map(|&l| l as usize).collect())
    } else {
        None
    };
    OODSet::new(points, true_labels, source)
}

/// Writes an OOD set; unlabeled rows are encoded with label `-1`.
pub fn save_ood(ood: &OODSet, path: &Path, format: FileFormat) -> Result<()> {
    let labels: Vec<i64> = match &ood.true_labels {
        Some(ls) => ls.iter().map(|&l| l as i64).collect(),
        None => vec![-1; ood.points.len()],
    };
    let bytes = match format {
        FileFormat::Csv => encode_csv_raw(&ood.points, &labels).into_bytes(),
        FileFormat::Binary => encode_binary_raw(&ood.points, &labels, 0),
    };
    write_atomic(path, &bytes)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(bytes).map_err(|e| io_err(path, e))?;
    Ok(())
}

fn parse_csv(path: &Path, text: &str) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let (points, raw) = parse_csv_raw(path, text)?;
    let mut labels = Vec::with_capacity(raw.len());
    for (row, &l) in raw.iter().enumerate() {
        if l < 0 {
            return Err(parse_err(path, row + 1, format!("negative label {l}")));
        }
        labels.push(l as usize);
    }
    Ok((points, labels))
}

fn parse_csv_raw(path: &Path, text: &str) -> Result<(Vec<Vec<f64>>, Vec<i64>)> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label_field = fields.next().unwrap().trim();
        let label: i64 = label_field
            .parse()
            .map_err(|_| parse_err(path, idx + 1, format!("bad label `{label_field}`")))?;
        let mut coords = Vec::new();
        for field in fields {
            let field = field.trim();
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, idx + 1, format!("bad coordinate `{field}`")))?;
            coords.push(v);
        }
        if coords.is_empty() {
            return Err(parse_err(path, idx + 1, "row has no coordinates"));
        }
        match width {
            None => width = Some(coords.len()),
            Some(w) if w != coords.len() => {
                return Err(NcgError::InconsistentDimension {
                    row: points.len(),
                    expected: w,
                    got: coords.len(),
                });
            }
            _ => {}
        }
        points.push(coords);
        labels.push(label);
    }
    if points.is_empty() {
        return Err(NcgError::EmptyDataset);
    }
    Ok((points, labels))
}

fn encode_csv(points: &[Vec<f64>], labels: &[usize]) -> String {
    let raw: Vec<i64> = labels.iter().map(|&l| l as i64).collect();
    encode_csv_raw(points, &raw)
}

fn encode_csv_raw(points: &[Vec<f64>], labels: &[i64]) -> String {
    let mut out = String::new();
    for (p, l) in points.iter().zip(labels) {
        out.push_str(&l.to_string());
        for v in p {
            out.push(',');
            // Shortest round-trip decimal form.
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

fn parse_binary(path: &Path, bytes: &[u8]) -> Result<(Vec<Vec<f64>>, Vec<usize>, usize)> {
    let (points, raw, class_count) = parse_binary_raw(path, bytes)?;
    let mut labels = Vec::with_capacity(raw.len());
    for (row, &l) in raw.iter().enumerate() {
        if l < 0 {
            return Err(parse_err(path, row, format!("negative label {l}")));
        }
        if l as usize >= class_count {
            return Err(NcgError::LabelOutOfRange {
                label: l,
                class_count,
            });
        }
        labels.push(l as usize);
    }
    Ok((points, labels, class_count))
}

fn parse_binary_raw(path: &Path, bytes: &[u8]) -> Result<(Vec<Vec<f64>>, Vec<i64>, usize)> {
    if bytes.len() < 16 || &bytes[0..4] != BINARY_MAGIC {
        return Err(parse_err(path, 0, "missing NCG1 magic"));
    }
    let mut cursor = &bytes[4..];
    let mut u32_buf = [0u8; 4];
    let mut read_u32 = |cursor: &mut &[u8]| -> Result<u32> {
        cursor
            .read_exact(&mut u32_buf)
            .map_err(|e| io_err(path, e))?;
        Ok(u32::from_le_bytes(u32_buf))
    };
    let n = read_u32(&mut cursor)? as usize;
    let d = read_u32(&mut cursor)? as usize;
    let class_count = read_u32(&mut cursor)? as usize;
    let record = 4 + 4 * d;
    if cursor.len() != n * record {
        return Err(parse_err(
            path,
            0,
            format!("expected {} payload bytes, found {}", n * record, cursor.len()),
        ));
    }
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut label_buf = [0u8; 4];
        cursor
            .read_exact(&mut label_buf)
            .map_err(|e| io_err(path, e))?;
        labels.push(i32::from_le_bytes(label_buf) as i64);
        let mut coords = Vec::with_capacity(d);
        for _ in 0..d {
            let mut f_buf = [0u8; 4];
            cursor.read_exact(&mut f_buf).map_err(|e| io_err(path, e))?;
            coords.push(f32::from_le_bytes(f_buf) as f64);
        }
        points.push(coords);
    }
    Ok((points, labels, class_count))
}

fn encode_binary(points: &[Vec<f64>], labels: &[usize], class_count: usize) -> Vec<u8> {
    let raw: Vec<i64> = labels.iter().map(|&l| l as i64).collect();
    encode_binary_raw(points, &raw, class_count)
}

fn encode_binary_raw(points: &[Vec<f64>], labels: &[i64], class_count: usize) -> Vec<u8> {
    let n = points.len();
    let d = points.first().map(|p| p.len()).unwrap_or(0);
    let mut out = Vec::with_capacity(16 + n * (4 + 4 * d));
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    out.extend_from_slice(&(class_count as u32).to_le_bytes());
    for (p, &l) in points.iter().zip(labels) {
        out.extend_from_slice(&(l as i32).to_le_bytes());
        for &v in p {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Held-out-class splitting
// ---------------------------------------------------------------------------

/// Removes class `c` from the dataset, remapping the remaining labels to a
/// contiguous `[0, C-1)` range. Returns the reduced training set, the
/// held-out points as an unlabeled OOD set, and the `(old, new)` label map.
pub fn hold_out_class(
    ds: &LabeledDataset,
    c: usize,
) -> Result<(LabeledDataset, OODSet, Vec<(usize, usize)>)> {
    if ds.class_count < 3 {
        return Err(NcgError::TooFewClasses(ds.class_count));
    }
    if c >= ds.class_count {
        return Err(NcgError::ClassOutOfRange {
            index: c,
            class_count: ds.class_count,
        });
    }
    let mut label_map = Vec::with_capacity(ds.class_count - 1);
    let mut remap = vec![usize::MAX; ds.class_count];
    let mut next = 0;
    for old in 0..ds.class_count {
        if old != c {
            remap[old] = next;
            label_map.push((old, next));
            next += 1;
        }
    }
    let mut train_points = Vec::new();
    let mut train_labels = Vec::new();
    let mut ood_points = Vec::new();
    for (p, &l) in ds.points.iter().zip(&ds.labels) {
        if l == c {
            ood_points.push(p.clone());
        } else {
            train_points.push(p.clone());
            train_labels.push(remap[l]);
        }
    }
    let train = LabeledDataset::new(
        train_points,
        train_labels,
        ds.class_count - 1,
        format!("{}-minus-class-{}", ds.name, c),
    )?;
    let ood = OODSet::new(ood_points, None, format!("held-out-class-{c}"))?;
    Ok((train, ood, label_map))
}

// ---------------------------------------------------------------------------
// Three-cluster generator
// ---------------------------------------------------------------------------

/// One isotropic Gaussian cluster: a center and its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    /// Cluster center.
    pub center: [f64; 2],
    /// Gaussian standard deviation before the global `noise_scale` factor.
    pub radius: f64,
}

/// Layout of the two-class synthetic task: one class split over two
/// flanking clusters, the other in a single middle cluster, plus one OOD
/// cluster sitting above the gap between the middle cluster and one flank.
///
/// The defaults place the OOD cluster nearer (pointwise, not just by
/// centers) to the split class, so its 1-NN label is the split class for
/// every generated point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeClusterSpec {
    /// The class split over two clusters (label 1, drawn purple in plots).
    pub split_clusters: [ClusterSpec; 2],
    /// The single-cluster class (label 0, drawn orange).
    pub single_cluster: ClusterSpec,
    /// The out-of-distribution cluster (unlabeled).
    pub ood_cluster: ClusterSpec,
    /// Samples drawn per cluster (each of the four).
    pub samples_per_cluster: usize,
    /// Global multiplier applied to every cluster radius.
    pub noise_scale: f64,
}

impl Default for ThreeClusterSpec {
    fn default() -> Self {
        Self {
            split_clusters: [
                ClusterSpec {
                    center: [-4.0, 0.0],
                    radius: 0.4,
                },
                ClusterSpec {
                    center: [4.0, 0.0],
                    radius: 0.4,
                },
            ],
            single_cluster: ClusterSpec {
                center: [0.0, 0.0],
                radius: 0.4,
            },
            ood_cluster: ClusterSpec {
                center: [3.2, 2.4],
                radius: 0.12,
            },
            samples_per_cluster: 200,
            noise_scale: 1.0,
        }
    }
}

impl ThreeClusterSpec {
    /// Checks the layout invariant: the OOD center must be strictly closer
    /// to one class than to the other, so its nearest-category label is
    /// unambiguous at the center level.
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_cluster == 0 {
            return Err(NcgError::InvalidParameter {
                name: "samples_per_cluster",
                why: "must be at least 1".into(),
            });
        }
        if !(self.noise_scale > 0.0) {
            return Err(NcgError::InvalidParameter {
                name: "noise_scale",
                why: "must be positive".into(),
            });
        }
        let o = &self.ood_cluster.center;
        let to_split = self
            .split_clusters
            .iter()
            .map(|c| crate::linalg::dist(o, &c.center))
            .fold(f64::INFINITY, f64::min);
        let to_single = crate::linalg::dist(o, &self.single_cluster.center);
        if to_split == to_single {
            return Err(NcgError::InvalidParameter {
                name: "ood_cluster",
                why: "OOD center is equidistant from both classes".into(),
            });
        }
        Ok(())
    }
}

/// Draws the synthetic two-class training set and its OOD cluster.
///
/// Cluster draw streams are independent of each other, so the same seed
/// yields the same cluster contents regardless of layout tweaks elsewhere.
pub fn generate_three_cluster(
    spec: &ThreeClusterSpec,
    seed: u64,
) -> Result<(LabeledDataset, OODSet)> {
    spec.validate()?;
    let n = spec.samples_per_cluster;
    let mut points = Vec::with_capacity(3 * n);
    let mut labels = Vec::with_capacity(3 * n);
    let clusters = [
        (&spec.single_cluster, 0usize),
        (&spec.split_clusters[0], 1),
        (&spec.split_clusters[1], 1),
    ];
    for (idx, (cluster, label)) in clusters.iter().enumerate() {
        let mut rng = rng::substream(seed, STREAM_GEN + idx as u64);
        let sigma = cluster.radius * spec.noise_scale;
        let normal = Normal::new(0.0, sigma).map_err(|e| NcgError::InvalidParameter {
            name: "radius",
            why: e.to_string(),
        })?;
        for _ in 0..n {
            points.push(vec![
                cluster.center[0] + normal.sample(&mut rng),
                cluster.center[1] + normal.sample(&mut rng),
            ]);
            labels.push(*label);
        }
    }
    let mut rng = rng::substream(seed, STREAM_GEN + 3);
    let sigma = spec.ood_cluster.radius * spec.noise_scale;
    let normal = Normal::new(0.0, sigma).map_err(|e| NcgError::InvalidParameter {
        name: "radius",
        why: e.to_string(),
    })?;
    let mut ood_points = Vec::with_capacity(n);
    for _ in 0..n {
        ood_points.push(vec![
            spec.ood_cluster.center[0] + normal.sample(&mut rng),
            spec.ood_cluster.center[1] + normal.sample(&mut rng),
        ]);
    }
    let train = LabeledDataset::new(points, labels, 2, "three-cluster")?;
    let ood = OODSet::new(ood_points, None, "three-cluster-ood")?;
    Ok((train, ood))
}

// ---------------------------------------------------------------------------
// Corruptions
// ---------------------------------------------------------------------------

/// Vector-space corruption kinds, graded by an integer level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    /// Additive Gaussian noise, σ_d = 0.1 · level · stddev_d.
    GaussianNoise,
    /// Additive Uniform(−a_d, a_d) noise, a_d = 0.1 · level · stddev_d.
    UniformNoise,
    /// Contraction toward the column mean by factor 1 − 0.15 · level.
    Contrast,
}

impl std::str::FromStr for CorruptionKind {
    type Err = NcgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_noise" => Ok(CorruptionKind::GaussianNoise),
            "uniform_noise" => Ok(CorruptionKind::UniformNoise),
            "contrast" => Ok(CorruptionKind::Contrast),
            other => Err(NcgError::InvalidParameter {
                name: "corruption",
                why: format!(
                    "unknown kind `{other}` (expected gaussian_noise, uniform_noise, or contrast)"
                ),
            }),
        }
    }
}

/// A corruption kind together with its intensity level (0 = identity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub level: u32,
}

/// Applies a corruption to a point matrix. Level 0 returns the input
/// unchanged without consuming randomness. Noise magnitudes are scaled by
/// the per-dimension population standard deviation of the input.
pub fn apply_corruption(
    points: &[Vec<f64>],
    spec: CorruptionSpec,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if spec.level > 5 {
        return Err(NcgError::InvalidParameter {
            name: "level",
            why: format!("level {} outside 0..=5", spec.level),
        });
    }
    if points.is_empty() {
        return Err(NcgError::EmptyDataset);
    }
    if spec.level == 0 {
        return Ok(points.to_vec());
    }
    let m = points.len();
    let d = points[0].len();
    let mut mean = vec![0.0; d];
    for p in points {
        for (acc, &v) in mean.iter_mut().zip(p) {
            *acc += v;
        }
    }
    for acc in &mut mean {
        *acc /= m as f64;
    }
    let mut std = vec![0.0; d];
    for p in points {
        for ((acc, &v), &mu) in std.iter_mut().zip(p).zip(&mean) {
            *acc += (v - mu) * (v - mu);
        }
    }
    for acc in &mut std {
        *acc = (*acc / m as f64).sqrt();
    }
    let level = spec.level as f64;
    let mut rng = rng::seeded(seed);
    let mut out = Vec::with_capacity(m);
    match spec.kind {
        CorruptionKind::GaussianNoise => {
            let unit = Normal::new(0.0, 1.0).unwrap();
            for p in points {
                out.push(
                    p.iter()
                        .zip(&std)
                        .map(|(&v, &s)| v + 0.1 * level * s * unit.sample(&mut rng))
                        .collect(),
                );
            }
        }
        CorruptionKind::UniformNoise => {
            let unit = Uniform::new_inclusive(-1.0, 1.0).unwrap();
            for p in points {
                out.push(
                    p.iter()
                        .zip(&std)
                        .map(|(&v, &s)| v + 0.1 * level * s * rng.sample(unit))
                        .collect(),
                );
            }
        }
        CorruptionKind::Contrast => {
            let factor = 1.0 - 0.15 * level;
            for p in points {
                out.push(
                    p.iter()
                        .zip(&mean)
                        .map(|(&v, &mu)| mu + factor * (v - mu))
                        .collect(),
                );
            }
        }
    }
    Ok(out)
}

/// Convenience wrapper: corrupts an OOD set, tagging its source.
pub fn corrupt_ood(ood: &OODSet, spec: CorruptionSpec, seed: u64) -> Result<OODSet> {
    let points = apply_corruption(&ood.points, spec, seed)?;
    let kind = match spec.kind {
        CorruptionKind::GaussianNoise => "gaussian_noise",
        CorruptionKind::UniformNoise => "uniform_noise",
        CorruptionKind::Contrast => "contrast",
    };
    OODSet::new(
        points,
        ood.true_labels.clone(),
        format!("{}-{}-l{}", ood.source, kind, spec.level),
    )
}

/// Default path extension for a format.
pub fn default_extension(format: FileFormat) -> &'static str {
    match format {
        FileFormat::Csv => "csv",
        FileFormat::Binary => "ncg",
    }
}

/// Infers a format from a path extension, defaulting to CSV.
pub fn format_from_path(path: &Path) -> FileFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("ncg") | Some("bin") => FileFormat::Binary,
        _ => FileFormat::Csv,
    }
}
