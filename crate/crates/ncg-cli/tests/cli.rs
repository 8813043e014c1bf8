//! End-to-end tests driving the compiled `ncg` binary: command behavior,
//! exit codes, determinism, schema conformance of emitted reports, and
//! reproduction of every command from the config it embeds in its output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ncg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ncg"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed with status {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("binary runs").status.code().expect("exit code")
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&read(path)).expect("valid JSON")
}

/// Generates the default three-cluster benchmark into `dir`, returning the
/// train and ood paths.
fn gen_three_cluster(dir: &Path, seed: u64) -> (PathBuf, PathBuf) {
    let train = dir.join("train.ncg");
    let ood = dir.join("ood.ncg");
    run_ok(
        ncg()
            .args(["gen", "three-cluster", "--seed"])
            .arg(seed.to_string())
            .arg("--out")
            .arg(&train)
            .arg("--ood")
            .arg(&ood),
    );
    (train, ood)
}

fn train_quick(dir: &Path, train: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let ckpt = dir.join(name);
    run_ok(
        ncg()
            .args(["train", "--data"])
            .arg(train)
            .args(["--epochs", "30", "--seed", "3"])
            .args(extra)
            .arg("--out")
            .arg(&ckpt),
    );
    ckpt
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

#[test]
fn gen_three_cluster_roundtrips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (train, ood) = gen_three_cluster(dir.path(), 7);

    let ds = ncg_core::dataset::load_dataset(&train, ncg_core::FileFormat::Binary).unwrap();
    assert_eq!(ds.n(), 600);
    assert_eq!(ds.class_count, 2);
    let ood_set = ncg_core::dataset::load_ood(&ood, ncg_core::FileFormat::Binary).unwrap();
    assert_eq!(ood_set.m(), 200);

    let again = dir.path().join("again");
    std::fs::create_dir(&again).unwrap();
    let (train2, ood2) = gen_three_cluster(&again, 7);
    assert_eq!(read(&train), read(&train2), "same flags must give identical bytes");
    assert_eq!(read(&ood), read(&ood2));

    let again2 = dir.path().join("again2");
    std::fs::create_dir(&again2).unwrap();
    let (train3, _) = gen_three_cluster(&again2, 8);
    assert_ne!(read(&train), read(&train3), "different seeds must differ");
}

#[test]
fn gen_theorem_rejects_eps_at_or_above_half() {
    let dir = tempfile::tempdir().unwrap();
    for eps in ["0.5", "0.7"] {
        let code = exit_code(
            ncg()
                .args(["gen", "theorem", "--C", "10", "--d", "5", "--eps", eps])
                .arg("--out")
                .arg(dir.path().join("t.ncg"))
                .arg("--ood")
                .arg(dir.path().join("n.ncg")),
        );
        assert_eq!(code, 2, "eps {eps} must be a usage error");
    }
}

#[test]
fn gen_corrupt_writes_same_shape() {
    let dir = tempfile::tempdir().unwrap();
    let (_, ood) = gen_three_cluster(dir.path(), 1);
    let out = dir.path().join("corrupted.ncg");
    run_ok(
        ncg()
            .args(["gen", "corrupt", "--kind", "contrast", "--level", "3", "--input"])
            .arg(&ood)
            .arg("--out")
            .arg(&out),
    );
    let corrupted = ncg_core::dataset::load_ood(&out, ncg_core::FileFormat::Binary).unwrap();
    assert_eq!(corrupted.m(), 200);
    assert_eq!(corrupted.dim(), 2);
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[test]
fn natural_equals_trades_uniform_with_beta_and_t_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = gen_three_cluster(dir.path(), 2);
    let a = train_quick(dir.path(), &train, "a.ckpt", &["--method", "natural"]);
    let b = train_quick(
        dir.path(),
        &train,
        "b.ckpt",
        &["--method", "trades_uniform", "--beta", "0", "--T", "0"],
    );
    let bytes_a = read(&a);
    let bytes_b = read(&b);
    let blob_a = &bytes_a[bytes_a.iter().position(|&c| c == b'\n').unwrap()..];
    let blob_b = &bytes_b[bytes_b.iter().position(|&c| c == b'\n').unwrap()..];
    assert_eq!(blob_a, blob_b, "parameter blobs must be identical");
}

#[test]
fn invalid_method_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = gen_three_cluster(dir.path(), 2);
    let code = exit_code(
        ncg()
            .args(["train", "--method", "bogus", "--data"])
            .arg(&train)
            .arg("--out")
            .arg(dir.path().join("x.ckpt")),
    );
    assert_eq!(code, 2);
}

#[test]
fn subvoronoi_trains_to_completion_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = gen_three_cluster(dir.path(), 0);
    let start = std::time::Instant::now();
    run_ok(
        ncg()
            .args(["train", "--method", "subvoronoi", "--lambda", "1.0", "--m-samples", "50"])
            .args(["--k", "4", "--data"])
            .arg(&train)
            .arg("--out")
            .arg(dir.path().join("sv.ckpt")),
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 120,
        "subvoronoi training took {elapsed:?}, budget is two minutes"
    );
}

#[test]
fn history_csv_has_one_row_per_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = gen_three_cluster(dir.path(), 2);
    let hist = dir.path().join("history.csv");
    run_ok(
        ncg()
            .args(["train", "--method", "natural", "--epochs", "12", "--data"])
            .arg(&train)
            .arg("--history")
            .arg(&hist)
            .arg("--out")
            .arg(dir.path().join("h.ckpt")),
    );
    let text = String::from_utf8(read(&hist)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("epoch,loss,train_accuracy,mean_epsilon"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = gen_three_cluster(dir.path(), 2);
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# defaults for this run\nepochs = 5\nmethod = natural\nseed = 11\n")
        .unwrap();
    let ckpt = dir.path().join("c.ckpt");
    run_ok(
        ncg()
            .arg("--config")
            .arg(&cfg)
            .args(["train", "--epochs", "3", "--data"])
            .arg(&train)
            .arg("--out")
            .arg(&ckpt),
    );
    let header = checkpoint_header(&ckpt);
    let config = &header["config"]["config"];
    assert_eq!(config["epochs"], 3, "flag beats file");
    assert_eq!(config["method"], "natural", "file beats default");
    assert_eq!(config["seed"], 11);
}

fn checkpoint_header(path: &Path) -> Value {
    let bytes = read(path);
    let line_end = bytes.iter().position(|&c| c == b'\n').unwrap();
    serde_json::from_slice(&bytes[..line_end]).expect("header line is JSON")
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[test]
fn eval_on_own_training_set_matches_train_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = gen_three_cluster(dir.path(), 4);
    let hist = dir.path().join("history.csv");
    let ckpt = dir.path().join("id.ckpt");
    run_ok(
        ncg()
            .args(["train", "--method", "natural", "--epochs", "30", "--data"])
            .arg(&train)
            .arg("--history")
            .arg(&hist)
            .arg("--out")
            .arg(&ckpt),
    );
    let report_path = dir.path().join("report.json");
    run_ok(
        ncg()
            .args(["eval", "--checkpoint"])
            .arg(&ckpt)
            .arg("--data")
            .arg(&train)
            .arg("--ood")
            .arg(&train)
            .arg("--out")
            .arg(&report_path),
    );
    let report = read_json(&report_path);
    let text = String::from_utf8(read(&hist)).unwrap();
    let last = text.lines().last().unwrap();
    let train_accuracy: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(report["ncg_accuracy"].as_f64().unwrap(), train_accuracy);
    assert_eq!(report["test_accuracy"].as_f64().unwrap(), train_accuracy);
}

#[test]
fn equal_count_bins_split_ten_points_into_five_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.ncg");
    let ood = dir.path().join("ood.ncg");
    run_ok(
        ncg()
            .args(["gen", "three-cluster", "--seed", "5", "--samples-per-cluster", "10"])
            .arg("--out")
            .arg(&train)
            .arg("--ood")
            .arg(&ood),
    );
    let ckpt = train_quick(dir.path(), &train, "small.ckpt", &["--method", "natural"]);
    let report_path = dir.path().join("report.json");
    run_ok(
        ncg()
            .args(["eval", "--bins", "5", "--bin-mode", "equal_count", "--checkpoint"])
            .arg(&ckpt)
            .arg("--data")
            .arg(&train)
            .arg("--ood")
            .arg(&ood)
            .arg("--out")
            .arg(&report_path),
    );
    let report = read_json(&report_path);
    let bins = report["per_bin"].as_array().unwrap();
    assert_eq!(bins.len(), 5);
    for row in bins {
        assert_eq!(row["count"], 2);
    }
}

#[test]
fn corrupt_level_without_kind_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (train, ood) = gen_three_cluster(dir.path(), 2);
    let ckpt = train_quick(dir.path(), &train, "c.ckpt", &["--method", "natural"]);
    let code = exit_code(
        ncg()
            .args(["eval", "--corrupt-level", "2", "--checkpoint"])
            .arg(&ckpt)
            .arg("--data")
            .arg(&train)
            .arg("--ood")
            .arg(&ood)
            .arg("--out")
            .arg(dir.path().join("r.json")),
    );
    assert_eq!(code, 2);
}

// ---------------------------------------------------------------------------
// theorem
// ---------------------------------------------------------------------------

#[test]
fn theorem_reproduces_committed_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.json");
    run_ok(
        ncg()
            .args(["theorem", "--C", "10", "--d", "5", "--eps", "0.05"])
            .args(["--trials", "200", "--seed", "1"])
            .arg("--out")
            .arg(&out),
    );
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/theorem-c10-d5.json");
    assert_eq!(
        read(&out),
        read(Path::new(fixture)),
        "theorem summary must match the committed fixture byte-for-byte"
    );
    let summary = read_json(&out);
    assert_eq!(summary["summary"]["mean_nu_correct_fraction"], 1.0);
}

#[test]
fn theorem_zero_trials_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let code = exit_code(
        ncg()
            .args(["theorem", "--C", "10", "--d", "5", "--eps", "0.05", "--trials", "0"])
            .arg("--out")
            .arg(dir.path().join("s.json")),
    );
    assert_eq!(code, 2);
}

#[test]
fn theorem_writes_records_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.json");
    let records = dir.path().join("records.csv");
    let svg = dir.path().join("plot.svg");
    run_ok(
        ncg()
            .args(["theorem", "--C", "3", "--d", "2", "--eps", "0.1", "--trials", "40"])
            .arg("--out")
            .arg(&out)
            .arg("--records")
            .arg(&records)
            .arg("--svg")
            .arg(&svg),
    );
    let text = String::from_utf8(read(&records)).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("trial,samples_to_ncg,samples_to_detect,nu_correct_fraction")
    );
    assert_eq!(lines.count(), 40);
    let svg_text = String::from_utf8(read(&svg)).unwrap();
    assert!(svg_text.starts_with("<svg"));
    assert!(svg_text.ends_with("</svg>\n"));
}

// ---------------------------------------------------------------------------
// schema conformance
// ---------------------------------------------------------------------------

mod schema {
    use serde_json::Value;

    /// Minimal validator for the subset of JSON Schema draft-07 the
    /// committed schema uses: type unions, required, properties with
    /// additionalProperties: false, items, oneOf, #/definitions refs, and
    /// numeric minimum.
    pub fn validate(value: &Value, schema: &Value, root: &Value, at: &str) -> Result<(), String> {
        if let Some(reference) = schema.get("$ref").and_then(Value::as_str) {
            let name = reference
                .strip_prefix("#/definitions/")
                .ok_or_else(|| format!("{at}: unsupported $ref {reference}"))?;
            let target = root
                .get("definitions")
                .and_then(|d| d.get(name))
                .ok_or_else(|| format!("{at}: missing definition {name}"))?;
            return validate(value, target, root, at);
        }
        if let Some(variants) = schema.get("oneOf").and_then(Value::as_array) {
            let hits = variants
                .iter()
                .filter(|v| validate(value, v, root, at).is_ok())
                .count();
            return if hits == 1 {
                Ok(())
            } else {
                Err(format!("{at}: {hits} of {} oneOf variants matched", variants.len()))
            };
        }
        if let Some(ty) = schema.get("type") {
            let allowed: Vec<&str> = match ty {
                Value::String(s) => vec![s.as_str()],
                Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
                _ => return Err(format!("{at}: malformed type")),
            };
            if !allowed.iter().any(|t| type_matches(value, t)) {
                return Err(format!("{at}: {value} is none of {allowed:?}"));
            }
        }
        if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
            if let Some(n) = value.as_f64() {
                if n < min {
                    return Err(format!("{at}: {n} below minimum {min}"));
                }
            }
        }
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if value.get(key).is_none() {
                    return Err(format!("{at}: missing required key {key}"));
                }
            }
        }
        if let Some(props) = schema.get("properties").and_then(Value::as_object) {
            if let Some(obj) = value.as_object() {
                for (key, sub) in props {
                    if let Some(v) = obj.get(key) {
                        validate(v, sub, root, &format!("{at}.{key}"))?;
                    }
                }
                if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                    for key in obj.keys() {
                        if !props.contains_key(key) {
                            return Err(format!("{at}: unexpected key {key}"));
                        }
                    }
                }
            }
        }
        if let Some(items) = schema.get("items") {
            if let Some(arr) = value.as_array() {
                for (i, v) in arr.iter().enumerate() {
                    validate(v, items, root, &format!("{at}[{i}]"))?;
                }
            }
        }
        Ok(())
    }

    fn type_matches(value: &Value, ty: &str) -> bool {
        match ty {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            _ => false,
        }
    }
}

#[test]
fn reports_validate_against_committed_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (train, ood) = gen_three_cluster(dir.path(), 6);
    let ckpt = train_quick(dir.path(), &train, "s.ckpt", &["--method", "natural"]);
    let schema_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schema/ncg-report.schema.json");
    let schema = read_json(Path::new(schema_path));

    let plain = dir.path().join("plain.json");
    run_ok(
        ncg()
            .args(["eval", "--checkpoint"])
            .arg(&ckpt)
            .arg("--data")
            .arg(&train)
            .arg("--ood")
            .arg(&ood)
            .arg("--out")
            .arg(&plain),
    );
    let rich = dir.path().join("rich.json");
    run_ok(
        ncg()
            .args(["eval", "--coverage", "--log-scale", "--corrupt-kind", "uniform_noise"])
            .args(["--t-attack", "10", "--restarts", "1", "--checkpoint"])
            .arg(&ckpt)
            .arg("--data")
            .arg(&train)
            .arg("--ood")
            .arg(&ood)
            .arg("--out")
            .arg(&rich),
    );
    for path in [&plain, &rich] {
        let report = read_json(path);
        if let Err(msg) = schema::validate(&report, &schema, &schema, "$") {
            panic!("{} does not validate: {msg}", path.display());
        }
    }
    let rich_report = read_json(&rich);
    assert!(rich_report["coverage"].is_number());
    assert_eq!(rich_report["sweep"].as_array().unwrap().len(), 6);
}

// ---------------------------------------------------------------------------
// reproduction from embedded config
// ---------------------------------------------------------------------------

fn flag_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn usize_list(v: &Value) -> String {
    v.as_array()
        .expect("list field")
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[test]
fn train_rerun_from_checkpoint_config_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = gen_three_cluster(dir.path(), 9);
    let ckpt = train_quick(
        dir.path(),
        &train,
        "orig.ckpt",
        &["--method", "trades_uniform", "--beta", "2.5", "--decay-epochs", "10,20"],
    );
    let header = checkpoint_header(&ckpt);
    let config = &header["config"]["config"];

    let again = dir.path().join("again.ckpt");
    let mut cmd = ncg();
    cmd.args(["train", "--data"])
        .arg(header["config"]["data"].as_str().unwrap())
        .arg("--out")
        .arg(&again);
    for (flag, key) in [
        ("--method", "method"),
        ("--beta", "beta"),
        ("--r", "r"),
        ("--lambda", "lambda"),
        ("--k", "k"),
        ("--m-samples", "m_samples"),
        ("--t-pgd", "t_pgd"),
        ("--epochs", "epochs"),
        ("--lr", "lr"),
        ("--momentum", "momentum"),
        ("--batch-size", "batch_size"),
        ("--eta", "eta"),
        ("--thresh", "thresh"),
        ("--seed", "seed"),
    ] {
        cmd.arg(flag).arg(flag_value(&config[key]));
    }
    cmd.arg("--hidden").arg(usize_list(&config["hidden"]));
    cmd.arg("--decay-epochs").arg(usize_list(&config["decay_epochs"]));
    run_ok(&mut cmd);
    assert_eq!(read(&ckpt), read(&again), "rerun from embedded config must reproduce bytes");
}

#[test]
fn eval_rerun_from_report_config_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (train, ood) = gen_three_cluster(dir.path(), 10);
    let ckpt = train_quick(dir.path(), &train, "e.ckpt", &["--method", "natural"]);
    let first = dir.path().join("first.json");
    run_ok(
        ncg()
            .args(["eval", "--coverage", "--corrupt-kind", "gaussian_noise", "--seed", "21"])
            .args(["--t-attack", "10", "--restarts", "1", "--bins", "4", "--checkpoint"])
            .arg(&ckpt)
            .arg("--data")
            .arg(&train)
            .arg("--ood")
            .arg(&ood)
            .arg("--out")
            .arg(&first),
    );
    let config = read_json(&first)["config"].clone();

    let again = dir.path().join("again.json");
    let mut cmd = ncg();
    cmd.arg("eval").arg("--out").arg(&again);
    for (flag, key) in [
        ("--checkpoint", "checkpoint"),
        ("--data", "data"),
        ("--ood", "ood"),
        ("--bins", "bins"),
        ("--bin-mode", "bin-mode"),
        ("--hist-bins", "hist-bins"),
        ("--t-attack", "t-attack"),
        ("--restarts", "restarts"),
        ("--bisect-steps", "bisect-steps"),
        ("--r-hi", "r-hi"),
        ("--seed", "seed"),
    ] {
        cmd.arg(flag).arg(flag_value(&config[key]));
    }
    for (flag, key) in [("--corrupt-kind", "corrupt-kind"), ("--corrupt-level", "corrupt-level")] {
        if !config[key].is_null() {
            cmd.arg(flag).arg(flag_value(&config[key]));
        }
    }
    for (flag, key) in [("--log-scale", "log-scale"), ("--coverage", "coverage")] {
        if config[key] == Value::Bool(true) {
            cmd.arg(flag);
        }
    }
    run_ok(&mut cmd);
    assert_eq!(read(&first), read(&again));
}

#[test]
fn theorem_rerun_from_summary_config_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    run_ok(
        ncg()
            .args(["theorem", "--C", "4", "--d", "3", "--eps", "0.2", "--trials", "60"])
            .args(["--n-test", "50", "--seed", "17"])
            .arg("--out")
            .arg(&first),
    );
    let config = read_json(&first)["config"].clone();

    let again = dir.path().join("again.json");
    let mut cmd = ncg();
    cmd.arg("theorem").arg("--out").arg(&again);
    for (flag, key) in [
        ("--C", "C"),
        ("--d", "d"),
        ("--eps", "eps"),
        ("--trials", "trials"),
        ("--n-test", "n-test"),
        ("--seed", "seed"),
    ] {
        cmd.arg(flag).arg(flag_value(&config[key]));
    }
    run_ok(&mut cmd);
    assert_eq!(read(&first), read(&again));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let (train, ood) = gen_three_cluster(dir.path(), 12);
    let ckpt = train_quick(dir.path(), &train, "t.ckpt", &["--method", "natural"]);
    let default_out = dir.path().join("default.json");
    let single_out = dir.path().join("single.json");
    for (threads, out) in [(None, &default_out), (Some("1"), &single_out)] {
        let mut cmd = ncg();
        if let Some(t) = threads {
            cmd.args(["--threads", t]);
        }
        cmd.args(["eval", "--checkpoint"])
            .arg(&ckpt)
            .arg("--data")
            .arg(&train)
            .arg("--ood")
            .arg(&ood)
            .arg("--out")
            .arg(out);
        run_ok(&mut cmd);
    }
    assert_eq!(read(&default_out), read(&single_out));
}
