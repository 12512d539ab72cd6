use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_channel-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn csv_column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

fn identity2() -> Value {
    json!({"d_in": 2, "d_out": 2, "kraus": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]})
}

/// `V|i> = |i>|i>` on C^2 ⊗ C^2.
fn dephasing_isometry() -> Value {
    let z = [0.0, 0.0];
    let o = [1.0, 0.0];
    json!({"d_a": 2, "d_b": 2, "d_e": 2, "v": [[o, z], [z, z], [z, z], [z, o]]})
}

#[test]
fn identity_kraus_to_stinespring_has_trivial_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_json(dir.path(), "id.json", &identity2());
    let out: Value = serde_json::from_str(&ok(&["convert", "--in", &input, "--to", "stinespring"])).unwrap();
    assert_eq!(out["d_e"], 1);
    assert_eq!(out["metadata"]["verified"], true);
    assert_eq!(out["metadata"]["source"], "kraus");
}

#[test]
fn dephasing_to_unitary_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_json(dir.path(), "deph.json", &dephasing_isometry());
    let target = dir.path().join("u.json");
    ok(&["convert", "--in", &input, "--to", "unitary", "--out", target.to_str().unwrap()]);
    let u: Value = serde_json::from_str(&fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(u["metadata"]["kind"], "unitary");
    assert_eq!(u["metadata"]["verified"], true);
    assert!(u["metadata"]["unitarity_deviation"].as_f64().unwrap() < 1e-10);

    // the emitted file re-validates and converts back
    let back: Value =
        serde_json::from_str(&ok(&["convert", "--in", target.to_str().unwrap(), "--to", "minimal"])).unwrap();
    assert_eq!(back["d_e"], 2);
    assert!(back["metadata"]["action_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn malformed_input_exits_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\"d_in\": 2, ").unwrap();
    let out = run(&["convert", "--in", p.to_str().unwrap(), "--to", "kraus"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));

    let unknown = write_json(dir.path(), "unknown.json", &json!({"foo": 1}));
    assert_eq!(run(&["convert", "--in", &unknown, "--to", "kraus"]).status.code(), Some(3));
    assert_eq!(run(&["convert", "--to", "kraus"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_channel_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let scaled = json!({"d_in": 1, "d_out": 1, "kraus": [[[[2.0, 0.0]]]]});
    let p = write_json(dir.path(), "scaled.json", &scaled);
    let out = run(&["convert", "--in", &p, "--to", "stinespring"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["convert", "--in", missing.to_str().unwrap(), "--to", "kraus"]).status.code(), Some(1));
}

#[test]
fn compress_sweep_strongstar_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("compress");
    ok(&["sequence", "compress", "--dim", "8", "--seed", "7", "--out", prefix.to_str().unwrap()]);
    let csv = fs::read_to_string(dir.path().join("compress.csv")).unwrap();
    let star = csv_column(&csv, "strongstar");
    assert_eq!(star.len(), 8);
    for w in star.windows(2) {
        assert!(w[1] <= w[0] + 1e-10, "{star:?}");
    }
    assert!(star[7].abs() <= 1e-10);
    for col in ["strong", "choi"] {
        assert!(csv_column(&csv, col)[7].abs() <= 1e-10);
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("compress.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "channel-lab/1");
    assert_eq!(report["rows"].as_array().unwrap().len(), 8);
}

#[test]
fn swap_sweep_has_unit_strongstar_witness() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("swap");
    ok(&["sequence", "swap", "--dim", "16", "--random", "0", "--out", prefix.to_str().unwrap()]);
    let csv = fs::read_to_string(dir.path().join("swap.csv")).unwrap();
    let star = csv_column(&csv, "strongstar");
    assert_eq!(star.len(), 15);
    // the family maximum never drops below the unit witness
    for s in &star {
        assert!(*s >= 1.0 - 1e-10, "{s}");
    }
    assert!((star[0] - 1.0).abs() <= 1e-10);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("swap.json")).unwrap()).unwrap();
    let notes: Vec<&str> = report["notes"].as_array().unwrap().iter().map(|n| n.as_str().unwrap()).collect();
    let fixed = notes.iter().find(|n| n.starts_with("fixed witness (E3_0, e3)")).unwrap();
    let dev: f64 = fixed.rsplit("max deviation ").next().unwrap().trim_end_matches(')').parse().unwrap();
    assert!(dev <= 1e-10, "{fixed}");
}

#[test]
fn rotation_choi_vanishes() {
    let csv = ok(&["sequence", "partial-trace-form", "--dim", "2", "--indices", "1,10,1000"]);
    let choi = csv_column(&csv, "choi");
    assert!(choi[2] < 1e-3);
    assert!(choi[0] > choi[1] && choi[1] > choi[2]);
}

#[test]
fn gaussian_sequence_parameter_deviation_is_one_over_n() {
    let csv = ok(&["sequence", "gaussian", "--k", "0.5", "--indices", "2..100", "--grid", "25"]);
    let n = csv_column(&csv, "n");
    let k_dev = csv_column(&csv, "k_dev");
    assert_eq!(n.len(), 99);
    for (n, dev) in n.iter().zip(&k_dev) {
        assert!((dev - 1.0 / n).abs() <= 1e-12, "n={n}: {dev}");
    }
}

#[test]
fn attenuator_fixes_vacuum_and_echoes_input() {
    let out: Value = serde_json::from_str(&ok(&["gaussian", "apply", "--k", "0.5"])).unwrap();
    let sigma = &out["output"]["sigma"];
    for i in 0..2 {
        for j in 0..2 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((sigma[i][j].as_f64().unwrap() - expect).abs() <= 1e-12);
        }
    }
    assert_eq!(out["input"]["channel_source"]["attenuator"], 0.5);
    assert_eq!(out["input"]["state"]["s"], 1);
}

#[test]
fn apply_with_channel_file() {
    let dir = tempfile::tempdir().unwrap();
    let ch = json!({"s_in": 1, "s_out": 1, "K": [[1.0, 0.0], [0.0, 1.0]], "ell": [1.0, 0.0], "alpha": [[0.0, 0.0], [0.0, 0.0]]});
    let st = json!({"s": 1, "m": [0.0, 0.0], "sigma": [[1.0, 0.0], [0.0, 1.0]]});
    let chp = write_json(dir.path(), "ch.json", &ch);
    let stp = write_json(dir.path(), "st.json", &st);
    let out: Value = serde_json::from_str(&ok(&["gaussian", "apply", "--channel", &chp, "--in", &stp])).unwrap();
    assert_eq!(out["output"]["m"], json!([1.0, 0.0]));
    // a state where a channel is expected
    assert_eq!(run(&["gaussian", "apply", "--channel", &stp]).status.code(), Some(3));
}

#[test]
fn attenuator_distance_closed_form() {
    let out: Value = serde_json::from_str(&ok(&["gaussian", "distance", "--k", "0.6,0.5", "--eta", "10"])).unwrap();
    let expected = 2.0 * (1.0 - (-1.0f64).exp()).sqrt();
    assert!((out["distance"].as_f64().unwrap() - expected).abs() <= 1e-12);
    assert_eq!(run(&["gaussian", "distance", "--k", "1.5,0.5", "--eta", "1"]).status.code(), Some(2));
    assert_eq!(run(&["gaussian", "distance", "--k", "0.5", "--eta", "1"]).status.code(), Some(3));
}

#[test]
fn validate_reports_offending_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let half = json!({"s": 1, "m": [0.0, 0.0], "sigma": [[0.5, 0.0], [0.0, 0.5]]});
    let p = write_json(dir.path(), "half.json", &half);
    let out = run(&["gaussian", "validate", "--in", &p]);
    assert_eq!(out.status.code(), Some(2));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["diagnostics"]["valid"], false);
    assert!((doc["min_eigenvalue"].as_f64().unwrap() + 0.5).abs() <= 1e-12);

    let vac = write_json(dir.path(), "vac.json", &json!({"s": 1, "m": [0.0, 0.0], "sigma": [[1.0, 0.0], [0.0, 1.0]]}));
    assert!(run(&["gaussian", "validate", "--in", &vac]).status.success());
}

#[test]
fn converge_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("conv.json");
    ok(&["gaussian", "converge", "--k", "0.5,0.6,0.55,0.51", "--grid", "25", "--out", json_path.to_str().unwrap()]);
    let csv = ok(&["report", "--in", json_path.to_str().unwrap(), "--format", "csv"]);
    let dev = csv_column(&csv, "param_dev");
    assert!(dev[0] > dev[1] && dev[1] > dev[2]);
    let summary = ok(&["report", "--in", json_path.to_str().unwrap()]);
    assert!(summary.contains("within eps"));

    let prefix = dir.path().join("swap");
    ok(&["sequence", "swap", "--dim", "9", "--out", prefix.to_str().unwrap()]);
    let stored = dir.path().join("swap.json");
    let reemitted = ok(&["report", "--in", stored.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(reemitted, fs::read_to_string(dir.path().join("swap.csv")).unwrap());
    let rejson = ok(&["report", "--in", stored.to_str().unwrap(), "--format", "json"]);
    assert_eq!(rejson, fs::read_to_string(&stored).unwrap());
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for prefix in [&a, &b] {
        let out = bin()
            .args(["sequence", "compress", "--dim", "4", "--seed", "11", "--out", prefix.to_str().unwrap()])
            .env("CHANNEL_LAB_THREADS", "2")
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    for ext in ["csv", "json"] {
        let read = |p: &Path| fs::read(p.with_extension(ext)).unwrap();
        assert_eq!(read(&a), read(&b));
    }
    let bad_threads = bin()
        .args(["sequence", "swap", "--dim", "4"])
        .env("CHANNEL_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(3));
}
