//! Implementations of the four subcommands. Every command resolves its
//! effective configuration (flags over config file over defaults), does
//! its work through the library crate, writes machine output to files,
//! and prints exactly one human-readable summary line.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde_json::{json, Value};

use ncg_core::attacks::{empirical_robust_radius, AttackConfig};
use ncg_core::dataset::{
    self, corrupt_ood, generate_three_cluster, CorruptionKind, CorruptionSpec, FileFormat,
    LabeledDataset, OODSet, ThreeClusterSpec,
};
use ncg_core::eval::{
    self, BinMode, NCGReport, ReportMetadata, SweepRow, SweepSlopes,
};
use ncg_core::mlp::{load_checkpoint, save_checkpoint};
use ncg_core::rng::{self, STREAM_GEN};
use ncg_core::stats::ls_slope;
use ncg_core::theoremsim::{complexity_curve, TheoremWorld, TrialRecord};
use ncg_core::trainer;
use ncg_core::{Method, NNIndex, NcgError, Result, TrainConfig};

use crate::cfgfile::{effective, effective_opt, parse_usize_list, FileConfig};
use crate::svg::{self, Panel, Series};

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| NcgError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct GenThreeClusterArgs {
    /// Generation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Points drawn per cluster (all four clusters).
    #[arg(long)]
    samples_per_cluster: Option<usize>,
    /// Multiplier on every cluster radius.
    #[arg(long)]
    noise_scale: Option<f64>,
    /// Output encoding: csv or binary.
    #[arg(long)]
    format: Option<String>,
    /// Training-set output path.
    #[arg(long)]
    out: PathBuf,
    /// OOD-set output path.
    #[arg(long)]
    ood: PathBuf,
}

pub fn gen_three_cluster(args: GenThreeClusterArgs, file: &FileConfig) -> Result<()> {
    let defaults = ThreeClusterSpec::default();
    let seed = effective(args.seed, file, "seed", 0)?;
    let spec = ThreeClusterSpec {
        samples_per_cluster: effective(
            args.samples_per_cluster,
            file,
            "samples-per-cluster",
            defaults.samples_per_cluster,
        )?,
        noise_scale: effective(args.noise_scale, file, "noise-scale", defaults.noise_scale)?,
        ..defaults
    };
    let format: FileFormat = effective(
        args.format.map(|s| s.parse()).transpose()?,
        file,
        "format",
        FileFormat::Binary,
    )?;
    let (train, ood) = generate_three_cluster(&spec, seed)?;
    dataset::save_dataset(&train, &args.out, format)?;
    dataset::save_ood(&ood, &args.ood, format)?;
    println!(
        "wrote {} train points and {} ood points (seed {seed}) -> {}, {}",
        train.n(),
        ood.m(),
        path_str(&args.out),
        path_str(&args.ood)
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct GenTheoremArgs {
    /// Number of classes.
    #[arg(long = "C")]
    class_count: Option<usize>,
    /// Ambient dimension.
    #[arg(long = "d")]
    dim: Option<usize>,
    /// Rare-cube probability mass, in (0, 0.5).
    #[arg(long)]
    eps: Option<f64>,
    /// Training draws from mu.
    #[arg(long)]
    n: Option<usize>,
    /// Test draws from nu.
    #[arg(long)]
    n_test: Option<usize>,
    /// Generation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output encoding: csv or binary.
    #[arg(long)]
    format: Option<String>,
    /// Training-set output path.
    #[arg(long)]
    out: PathBuf,
    /// Test-set output path.
    #[arg(long)]
    ood: PathBuf,
}

pub fn gen_theorem(args: GenTheoremArgs, file: &FileConfig) -> Result<()> {
    let class_count = effective(args.class_count, file, "C", 10)?;
    let dim = effective(args.dim, file, "d", 5)?;
    let eps = effective(args.eps, file, "eps", 0.05)?;
    let n = effective(args.n, file, "n", 1000)?;
    let n_test = effective(args.n_test, file, "n-test", 200)?;
    let seed = effective(args.seed, file, "seed", 0)?;
    let format: FileFormat = effective(
        args.format.map(|s| s.parse()).transpose()?,
        file,
        "format",
        FileFormat::Binary,
    )?;
    if n == 0 || n_test == 0 {
        return Err(NcgError::InvalidParameter {
            name: "n",
            why: "need at least one training and one test draw".into(),
        });
    }
    let world = TheoremWorld::new(class_count, dim, eps)?;
    let mut r = rng::substream(seed, STREAM_GEN);
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let draw = world.sample_mu(&mut r);
        points.push(draw.point);
        labels.push(draw.class_j - 1);
    }
    let train = LabeledDataset::new(points, labels, class_count, "theorem-mu")?;
    let mut ood_points = Vec::with_capacity(n_test);
    let mut ood_labels = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        let (point, class_j) = world.sample_nu(&mut r);
        ood_points.push(point);
        ood_labels.push(class_j - 1);
    }
    let ood = OODSet::new(ood_points, Some(ood_labels), "theorem-nu")?;
    dataset::save_dataset(&train, &args.out, format)?;
    dataset::save_ood(&ood, &args.ood, format)?;
    println!(
        "wrote {n} mu draws and {n_test} nu draws (C={class_count}, d={dim}, eps={eps}) -> {}, {}",
        path_str(&args.out),
        path_str(&args.ood)
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct GenCorruptArgs {
    /// OOD set to corrupt.
    #[arg(long)]
    input: PathBuf,
    /// Corruption kind: gaussian_noise, uniform_noise, or contrast.
    #[arg(long)]
    kind: Option<String>,
    /// Intensity level, 0..=5.
    #[arg(long)]
    level: Option<u32>,
    /// Corruption seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Corrupted-set output path.
    #[arg(long)]
    out: PathBuf,
}

pub fn gen_corrupt(args: GenCorruptArgs, file: &FileConfig) -> Result<()> {
    let kind_str = effective(args.kind, file, "kind", "gaussian_noise".to_string())?;
    let kind = CorruptionKind::from_str(&kind_str)?;
    let level = effective(args.level, file, "level", 1)?;
    let seed = effective(args.seed, file, "seed", 0)?;
    let ood = dataset::load_ood(&args.input, dataset::format_from_path(&args.input))?;
    let corrupted = corrupt_ood(&ood, CorruptionSpec { kind, level }, seed)?;
    dataset::save_ood(&corrupted, &args.out, dataset::format_from_path(&args.out))?;
    println!(
        "corrupted {} points with {kind_str} level {level} -> {}",
        corrupted.m(),
        path_str(&args.out)
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training dataset path.
    #[arg(long)]
    data: PathBuf,
    /// Training method: natural, trades_uniform, nonuniform_ball,
    /// ellipsoid, or subvoronoi.
    #[arg(long)]
    method: Option<String>,
    /// Smoothness weight in the TRADES objective.
    #[arg(long)]
    beta: Option<f64>,
    /// Uniform-ball radius.
    #[arg(long)]
    r: Option<f64>,
    /// Region shrinkage factor.
    #[arg(long)]
    lambda: Option<f64>,
    /// Neighbor count for the ellipsoid fit.
    #[arg(long)]
    k: Option<usize>,
    /// Differently-labeled subsample size for subvoronoi regions.
    #[arg(long)]
    m_samples: Option<usize>,
    /// Inner-maximization PGD steps.
    #[arg(long, alias = "T")]
    t_pgd: Option<usize>,
    /// Training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// SGD momentum.
    #[arg(long)]
    momentum: Option<f64>,
    /// Minibatch size.
    #[arg(long)]
    batch_size: Option<usize>,
    /// Per-epoch radius increment for the adaptive schedule.
    #[arg(long)]
    eta: Option<f64>,
    /// KL threshold that triggers the adaptive radius penalty.
    #[arg(long)]
    thresh: Option<f64>,
    /// Training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Hidden-layer widths, comma-separated.
    #[arg(long)]
    hidden: Option<String>,
    /// Epochs (1-based) at which the learning rate decays by 10x,
    /// comma-separated.
    #[arg(long)]
    decay_epochs: Option<String>,
    /// Checkpoint output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-epoch history CSV path.
    #[arg(long)]
    history: Option<PathBuf>,
}

fn resolve_train_config(args: &TrainArgs, file: &FileConfig) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let method_str = effective(
        args.method.clone(),
        file,
        "method",
        d.method.as_str().to_string(),
    )?;
    let hidden_str = effective(
        args.hidden.clone(),
        file,
        "hidden",
        d.hidden
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(","),
    )?;
    let decay_str = effective(args.decay_epochs.clone(), file, "decay-epochs", String::new())?;
    Ok(TrainConfig {
        method: Method::from_str(&method_str)?,
        beta: effective(args.beta, file, "beta", d.beta)?,
        r: effective(args.r, file, "r", d.r)?,
        lambda: effective(args.lambda, file, "lambda", d.lambda)?,
        k: effective(args.k, file, "k", d.k)?,
        m_samples: effective(args.m_samples, file, "m-samples", d.m_samples)?,
        t_pgd: effective(args.t_pgd, file, "t-pgd", d.t_pgd)?,
        epochs: effective(args.epochs, file, "epochs", d.epochs)?,
        lr: effective(args.lr, file, "lr", d.lr)?,
        momentum: effective(args.momentum, file, "momentum", d.momentum)?,
        batch_size: effective(args.batch_size, file, "batch-size", d.batch_size)?,
        eta: effective(args.eta, file, "eta", d.eta)?,
        thresh: effective(args.thresh, file, "thresh", d.thresh)?,
        seed: effective(args.seed, file, "seed", d.seed)?,
        hidden: parse_usize_list(&hidden_str, "hidden")?,
        decay_epochs: parse_usize_list(&decay_str, "decay-epochs")?,
    })
}

pub fn train(args: TrainArgs, file: &FileConfig) -> Result<()> {
    let config = resolve_train_config(&args, file)?;
    let ds = dataset::load_dataset(&args.data, dataset::format_from_path(&args.data))?;
    let (model, history) = trainer::train(&config, &ds)?;
    let echo = json!({
        "command": "train",
        "data": path_str(&args.data),
        "config": serde_json::to_value(&config).expect("config serializes"),
    });
    save_checkpoint(&model, &args.out, config.seed, echo)?;
    if let Some(history_path) = &args.history {
        let mut csv = String::from("epoch,loss,train_accuracy,mean_epsilon\n");
        for row in &history {
            let eps = row.mean_epsilon.map(|e| e.to_string()).unwrap_or_default();
            csv.push_str(&format!(
                "{},{},{},{}\n",
                row.epoch, row.loss, row.train_accuracy, eps
            ));
        }
        write_output(history_path, csv.as_bytes())?;
    }
    let last = history.last().expect("at least one epoch");
    println!(
        "trained {} on {} points for {} epochs: train accuracy {:.4} -> {}",
        config.method,
        ds.n(),
        config.epochs,
        last.train_accuracy,
        path_str(&args.out)
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint to evaluate.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Training dataset path (the 1-NN reference).
    #[arg(long)]
    data: PathBuf,
    /// OOD set path.
    #[arg(long)]
    ood: PathBuf,
    /// Distance-bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Binning mode: equal_count or equal_width.
    #[arg(long)]
    bin_mode: Option<String>,
    /// Histogram bin count.
    #[arg(long)]
    hist_bins: Option<usize>,
    /// Histogram distances and radii in log10.
    #[arg(long)]
    log_scale: bool,
    /// Corruption kind; with no --corrupt-level, evaluates a full 0..=5
    /// level sweep.
    #[arg(long)]
    corrupt_kind: Option<String>,
    /// Single corruption level (requires --corrupt-kind).
    #[arg(long)]
    corrupt_level: Option<u32>,
    /// Also estimate per-anchor robust radii and the OOD coverage.
    #[arg(long)]
    coverage: bool,
    /// Attack steps per restart.
    #[arg(long)]
    t_attack: Option<usize>,
    /// Attack restarts.
    #[arg(long)]
    restarts: Option<usize>,
    /// Radius bisection steps.
    #[arg(long)]
    bisect_steps: Option<usize>,
    /// Upper radius bracket.
    #[arg(long)]
    r_hi: Option<f64>,
    /// Seed for corruption and attack randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Report JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-bin CSV output path.
    #[arg(long)]
    bins_out: Option<PathBuf>,
    /// Optional SVG plot output path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

struct EvalSettings {
    bins: usize,
    bin_mode: BinMode,
    hist_bins: usize,
    log_scale: bool,
    corrupt_kind: Option<CorruptionKind>,
    corrupt_level: Option<u32>,
    coverage: bool,
    attack: AttackConfig,
    seed: u64,
}

fn resolve_eval_settings(args: &EvalArgs, file: &FileConfig) -> Result<EvalSettings> {
    let bin_mode_str = effective(
        args.bin_mode.clone(),
        file,
        "bin-mode",
        "equal_count".to_string(),
    )?;
    let kind_str = effective_opt(args.corrupt_kind.clone(), file, "corrupt-kind")?;
    let corrupt_kind = kind_str.as_deref().map(CorruptionKind::from_str).transpose()?;
    let corrupt_level = effective_opt(args.corrupt_level, file, "corrupt-level")?;
    if corrupt_level.is_some() && corrupt_kind.is_none() {
        return Err(NcgError::InvalidParameter {
            name: "corrupt-level",
            why: "requires --corrupt-kind".into(),
        });
    }
    let attack_defaults = AttackConfig::with_r_hi(4.0);
    let attack = AttackConfig {
        t_attack: effective(args.t_attack, file, "t-attack", attack_defaults.t_attack)?,
        restarts: effective(args.restarts, file, "restarts", attack_defaults.restarts)?,
        bisect_steps: effective(
            args.bisect_steps,
            file,
            "bisect-steps",
            attack_defaults.bisect_steps,
        )?,
        r_hi: effective(args.r_hi, file, "r-hi", attack_defaults.r_hi)?,
    };
    attack.validate()?;
    Ok(EvalSettings {
        bins: effective(args.bins, file, "bins", 5)?,
        bin_mode: BinMode::from_str(&bin_mode_str)?,
        hist_bins: effective(args.hist_bins, file, "hist-bins", 20)?,
        log_scale: args.log_scale || file.get("log-scale")?.unwrap_or(false),
        corrupt_kind,
        corrupt_level,
        coverage: args.coverage || file.get("coverage")?.unwrap_or(false),
        attack,
        seed: effective(args.seed, file, "seed", 0)?,
    })
}

fn kind_name(kind: CorruptionKind) -> &'static str {
    match kind {
        CorruptionKind::GaussianNoise => "gaussian_noise",
        CorruptionKind::UniformNoise => "uniform_noise",
        CorruptionKind::Contrast => "contrast",
    }
}

fn corrupted_at(ood: &OODSet, kind: CorruptionKind, level: u32, seed: u64) -> Result<OODSet> {
    corrupt_ood(
        ood,
        CorruptionSpec { kind, level },
        seed.wrapping_add(u64::from(level)),
    )
}

fn checkpoint_method(config: &Value) -> String {
    config
        .get("config")
        .and_then(|c| c.get("method"))
        .or_else(|| config.get("method"))
        .and_then(Value::as_str)
        .unwrap_or("unknown")
        .to_string()
}

pub fn eval(args: EvalArgs, file: &FileConfig) -> Result<()> {
    let settings = resolve_eval_settings(&args, file)?;
    let (model, header) = load_checkpoint(&args.checkpoint)?;
    let ds = dataset::load_dataset(&args.data, dataset::format_from_path(&args.data))?;
    let index = NNIndex::new(&ds);
    let base_ood = dataset::load_ood(&args.ood, dataset::format_from_path(&args.ood))?;

    let target = match (settings.corrupt_kind, settings.corrupt_level) {
        (Some(kind), Some(level)) => corrupted_at(&base_ood, kind, level, settings.seed)?,
        _ => base_ood.clone(),
    };

    let ncg_accuracy = eval::ncg_accuracy(&model, &index, &target)?;
    let labeled = target.true_labels.is_some();
    let (test_accuracy, split) = if labeled {
        (
            Some(eval::test_accuracy(&model, &target)?),
            Some(eval::split_by_ncg(&model, &index, &target)?),
        )
    } else {
        (None, None)
    };
    let per_bin = eval::bin_by_distance(&model, &index, &target, settings.bin_mode, settings.bins)?;
    let distances: Vec<f64> = index
        .nearest_batch(&target.points)?
        .iter()
        .map(|n| n.distance)
        .collect();
    let distance_histogram =
        Some(eval::distance_histogram(&distances, settings.log_scale, settings.hist_bins)?);

    let (coverage, radius_histogram) = if settings.coverage {
        let mut radii = HashMap::new();
        for n in index.nearest_batch(&target.points)? {
            if let std::collections::hash_map::Entry::Vacant(entry) = radii.entry(n.row) {
                let radius = match empirical_robust_radius(
                    &model,
                    &ds.points[n.row],
                    ds.labels[n.row],
                    &settings.attack,
                    settings.seed ^ n.row as u64,
                ) {
                    Ok(r) => r,
                    Err(NcgError::RadiusBracketExceeded { r_hi }) => r_hi,
                    Err(e) => return Err(e),
                };
                entry.insert(radius);
            }
        }
        let coverage = eval::coverage_within_radius(&index, &target, &radii)?;
        let mut values: Vec<f64> = radii.values().copied().collect();
        if settings.log_scale {
            values.retain(|&v| v > 0.0);
        }
        let histogram = if values.is_empty() {
            None
        } else {
            Some(eval::distance_histogram(
                &values,
                settings.log_scale,
                settings.hist_bins,
            )?)
        };
        (Some(coverage), histogram)
    } else {
        (None, None)
    };

    let (sweep, sweep_slopes) = match (settings.corrupt_kind, settings.corrupt_level) {
        (Some(kind), None) => {
            let mut rows = Vec::with_capacity(6);
            for level in 0..=5u32 {
                let slice = corrupted_at(&base_ood, kind, level, settings.seed)?;
                rows.push(SweepRow {
                    level,
                    ncg_accuracy: eval::ncg_accuracy(&model, &index, &slice)?,
                    test_accuracy: if labeled {
                        Some(eval::test_accuracy(&model, &slice)?)
                    } else {
                        None
                    },
                });
            }
            let levels: Vec<f64> = rows.iter().map(|r| f64::from(r.level)).collect();
            let ncg_vals: Vec<f64> = rows.iter().map(|r| r.ncg_accuracy).collect();
            let (ncg_slope, ncg_intercept) = ls_slope(&levels, &ncg_vals)?;
            let (test_slope, test_intercept) = if labeled {
                let test_vals: Vec<f64> =
                    rows.iter().map(|r| r.test_accuracy.unwrap_or(0.0)).collect();
                let (s, i) = ls_slope(&levels, &test_vals)?;
                (Some(s), Some(i))
            } else {
                (None, None)
            };
            (
                Some(rows),
                Some(SweepSlopes {
                    ncg_slope,
                    ncg_intercept,
                    test_slope,
                    test_intercept,
                }),
            )
        }
        _ => (None, None),
    };

    let config_echo = json!({
        "command": "eval",
        "checkpoint": path_str(&args.checkpoint),
        "data": path_str(&args.data),
        "ood": path_str(&args.ood),
        "bins": settings.bins,
        "bin-mode": match settings.bin_mode {
            BinMode::EqualCount => "equal_count",
            BinMode::EqualWidth => "equal_width",
        },
        "hist-bins": settings.hist_bins,
        "log-scale": settings.log_scale,
        "corrupt-kind": settings.corrupt_kind.map(kind_name),
        "corrupt-level": settings.corrupt_level,
        "coverage": settings.coverage,
        "t-attack": settings.attack.t_attack,
        "restarts": settings.attack.restarts,
        "bisect-steps": settings.attack.bisect_steps,
        "r-hi": settings.attack.r_hi,
        "seed": settings.seed,
    });
    let report = NCGReport {
        ncg_accuracy,
        test_accuracy,
        ncg_correct_count: split.as_ref().map(|s| s.ncg_correct_count),
        ncg_incorrect_count: split.as_ref().map(|s| s.ncg_incorrect_count),
        ncg_correct_test_acc: split.as_ref().and_then(|s| s.ncg_correct_test_acc),
        ncg_incorrect_test_acc: split.as_ref().and_then(|s| s.ncg_incorrect_test_acc),
        per_bin,
        coverage,
        distance_histogram,
        radius_histogram,
        sweep,
        sweep_slopes,
        tests: Vec::new(),
        metadata: ReportMetadata {
            dataset: ds.name.clone(),
            source: target.source.clone(),
            seed: settings.seed,
            method: checkpoint_method(&header.config),
        },
        config: config_echo,
    };

    let mut json_text = serde_json::to_string_pretty(&report).expect("report serializes");
    json_text.push('\n');
    write_output(&args.out, json_text.as_bytes())?;
    if let Some(bins_out) = &args.bins_out {
        write_output(bins_out, eval::bins_to_csv(&report.per_bin).as_bytes())?;
    }
    if let Some(svg_path) = &args.svg {
        let mut panels = Vec::new();
        if let Some(h) = &report.distance_histogram {
            panels.push(Panel::Histogram {
                title: "ood nearest-neighbor distances".into(),
                histogram: h.clone(),
            });
        }
        if let Some(h) = &report.radius_histogram {
            panels.push(Panel::Histogram {
                title: "empirical robust radii".into(),
                histogram: h.clone(),
            });
        }
        panels.push(Panel::Bars {
            title: "ncg accuracy by distance bin".into(),
            rows: report.per_bin.clone(),
        });
        if let Some(rows) = &report.sweep {
            let mut series = vec![Series {
                name: "ncg".into(),
                points: rows
                    .iter()
                    .map(|r| (f64::from(r.level), r.ncg_accuracy))
                    .collect(),
            }];
            if labeled {
                series.push(Series {
                    name: "test".into(),
                    points: rows
                        .iter()
                        .map(|r| (f64::from(r.level), r.test_accuracy.unwrap_or(0.0)))
                        .collect(),
                });
            }
            panels.push(Panel::Lines {
                title: "accuracy vs corruption level".into(),
                series,
            });
        }
        write_output(svg_path, svg::render(&panels).as_bytes())?;
    }
    println!(
        "ncg accuracy {:.4} on {} ood points ({}) -> {}",
        report.ncg_accuracy,
        target.m(),
        report.metadata.method,
        path_str(&args.out)
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// theorem
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct TheoremArgs {
    /// Number of classes.
    #[arg(long = "C")]
    class_count: Option<usize>,
    /// Ambient dimension.
    #[arg(long = "d")]
    dim: Option<usize>,
    /// Rare-cube probability mass, in (0, 0.5).
    #[arg(long)]
    eps: Option<f64>,
    /// Independent trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Fresh nu draws classified at each trial's NCG snapshot.
    #[arg(long)]
    n_test: Option<usize>,
    /// Base seed (one derived stream per trial).
    #[arg(long)]
    seed: Option<u64>,
    /// Summary JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-trial CSV output path.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Optional SVG plot output path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn records_csv(records: &[TrialRecord]) -> String {
    let mut csv = String::from("trial,samples_to_ncg,samples_to_detect,nu_correct_fraction\n");
    for (trial, rec) in records.iter().enumerate() {
        csv.push_str(&format!(
            "{trial},{},{},{}\n",
            rec.samples_to_ncg, rec.samples_to_detect, rec.nu_correct_fraction
        ));
    }
    csv
}

pub fn theorem(args: TheoremArgs, file: &FileConfig) -> Result<()> {
    let class_count = effective(args.class_count, file, "C", 10)?;
    let dim = effective(args.dim, file, "d", 5)?;
    let eps = effective(args.eps, file, "eps", 0.05)?;
    let trials = effective(args.trials, file, "trials", 200)?;
    let n_test = effective(args.n_test, file, "n-test", 100)?;
    let seed = effective(args.seed, file, "seed", 0)?;
    let world = TheoremWorld::new(class_count, dim, eps)?;
    let (summary, records) = complexity_curve(&world, trials, n_test, seed)?;
    let report = json!({
        "config": {
            "command": "theorem",
            "C": class_count,
            "d": dim,
            "eps": eps,
            "trials": trials,
            "n-test": n_test,
            "seed": seed,
        },
        "summary": serde_json::to_value(&summary).expect("summary serializes"),
    });
    let mut json_text = serde_json::to_string_pretty(&report).expect("report serializes");
    json_text.push('\n');
    write_output(&args.out, json_text.as_bytes())?;
    if let Some(records_path) = &args.records {
        write_output(records_path, records_csv(&records).as_bytes())?;
    }
    if let Some(svg_path) = &args.svg {
        let ncg: Vec<f64> = records.iter().map(|r| r.samples_to_ncg as f64).collect();
        let detect: Vec<f64> = records.iter().map(|r| r.samples_to_detect as f64).collect();
        let panels = vec![
            Panel::Histogram {
                title: "samples until every common cube is hit (ncg)".into(),
                histogram: eval::distance_histogram(&ncg, false, 20)?,
            },
            Panel::Histogram {
                title: "samples until every cube is hit (detect)".into(),
                histogram: eval::distance_histogram(&detect, false, 20)?,
            },
        ];
        write_output(svg_path, svg::render(&panels).as_bytes())?;
    }
    println!(
        "median samples: ncg {} detect {} over {trials} trials (mean nu correctness {:.4}) -> {}",
        summary.ncg.median,
        summary.detect.median,
        summary.mean_nu_correct_fraction,
        path_str(&args.out)
    );
    Ok(())
}
