use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fast(name: &str) -> PathBuf {
    root().join(format!("scenarios/fast/{name}.toml"))
}

fn aquid(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aquid"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn sha(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn fast_qubit(name: &str) -> (tempfile::TempDir, Value) {
    let dir = tempfile::tempdir().unwrap();
    let f = fast(name);
    let o = aquid(dir.path(), &["--table5-fast", f.to_str().unwrap(), "qubit"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("qubit_report.json"));
    (dir, report)
}

#[test]
fn fast_qubit_writes_outputs_with_digests() {
    let (dir, report) = fast_qubit("r800_n4500");
    let manifest = read_json(&dir.path().join("manifest.json"));
    let outputs = manifest["outputs"].as_array().unwrap();
    for file in ["spectrum.csv", "levels_currents.csv", "qubit_report.json"] {
        let entry = outputs
            .iter()
            .find(|o| o["file"] == file)
            .unwrap_or_else(|| panic!("{file} missing from manifest"));
        assert_eq!(entry["sha256"].as_str().unwrap(), sha(&dir.path().join(file)));
    }
    let stage = &manifest["stages"][0];
    assert_eq!(stage["name"], "qubit");
    assert_eq!(stage["status"], "ok");
    assert!(rel(report["quality"].as_f64().unwrap(), 11.10) < 0.02);
    assert!(rel(report["t_osc_s"].as_f64().unwrap(), 15.65) < 0.05);
    assert_eq!(report["source"], "table5-fast");
    assert_eq!(report["gbh_curve_hash"].as_str().unwrap(), sha(&fast("r800_n4500")));
}

#[test]
fn fast_qubit_csv_headers() {
    let (dir, _) = fast_qubit("r482");
    let spectrum = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(spectrum.starts_with("f_over_f0,E0_nK,"));
    assert_eq!(spectrum.lines().count(), 201);
    let currents = std::fs::read_to_string(dir.path().join("levels_currents.csv")).unwrap();
    assert!(currents.starts_with("f_over_f0,"));
}

#[test]
fn tabulated_rows_give_qubit_products_in_range() {
    for name in ["r385", "r482", "r800_n4500", "r800_n4000"] {
        let (_, report) = fast_qubit(name);
        let prod = report["product_q_dfpp"].as_f64().unwrap();
        assert!((0.002..=0.0035).contains(&prod), "{name}: {prod}");
        if name == "r385" {
            assert!(rel(report["q"].as_f64().unwrap(), 22.839) < 0.02);
        }
    }
}

#[test]
fn reruns_reproduce_digests() {
    let digests = |dir: &Path| -> Vec<(String, String)> {
        let m = read_json(&dir.join("manifest.json"));
        m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| (o["file"].as_str().unwrap().to_string(), o["sha256"].as_str().unwrap().to_string()))
            .collect()
    };
    let f = fast("r482");
    let args = ["--table5-fast", f.to_str().unwrap(), "--fsamples", "40", "all"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&aquid(a.path(), &args)), 0);
    assert_eq!(code(&aquid(b.path(), &args)), 0);
    let (da, db) = (digests(a.path()), digests(b.path()));
    assert_eq!(da.len(), 5);
    assert_eq!(da, db);
}

/// Largest of the two branch columns on each row, skipping absent values.
fn column_max(csv: &str, a: usize, b: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .filter_map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            [cols[a], cols[b]].iter().filter_map(|s| s.parse::<f64>().ok()).reduce(f64::max)
        })
        .collect()
}

#[test]
fn fast_critical_curves_match_tabulated_extremes() {
    let dir = tempfile::tempdir().unwrap();
    let f = fast("r482");
    assert_eq!(code(&aquid(dir.path(), &["--table5-fast", f.to_str().unwrap(), "critical"])), 0);
    let csv = std::fs::read_to_string(dir.path().join("critical_curves.csv")).unwrap();
    let ic = column_max(&csv, 3, 4);
    assert!(rel(ic.iter().copied().fold(0.0, f64::max), 0.1406) < 0.03);
    assert!(dir.path().join("interference.csv").exists());

    let dir = tempfile::tempdir().unwrap();
    let f = fast("r800_n4500");
    assert_eq!(code(&aquid(dir.path(), &["--table5-fast", f.to_str().unwrap(), "critical"])), 0);
    let csv = std::fs::read_to_string(dir.path().join("critical_curves.csv")).unwrap();
    let zc = column_max(&csv, 1, 2);
    assert!(rel(zc.iter().copied().fold(f64::INFINITY, f64::min), 0.00103) < 0.05);
}

#[test]
fn empty_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = fast("r385");
    let o = aquid(dir.path(), &["--table5-fast", f.to_str().unwrap(), "--fsamples", "0", "qubit"]);
    assert_eq!(code(&o), 2);
    let o = aquid(dir.path(), &["--scenario", "unused.toml", "--fsamples", "0", "gbh"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_command_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&aquid(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn invalid_scenario_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"bad\"\n[trap]\nv0_nk = 82.0\n").unwrap();
    let o = aquid(dir.path(), &["--scenario", bad.to_str().unwrap(), "stationary"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("stationary_zero_f0.0000.bin").exists());
}

#[test]
fn malformed_fast_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("fast.toml");
    std::fs::write(&bad, "name = \"x\"\nn_atoms = 0\n").unwrap();
    let o = aquid(dir.path(), &["--table5-fast", bad.to_str().unwrap(), "qubit"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn qubit_without_curve_or_fast_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = aquid(dir.path(), &["qubit"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn stationary_on_coarse_grid_writes_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let sc = root().join("scenarios/r385.toml");
    let o = aquid(dir.path(), &["--scenario", sc.to_str().unwrap(), "--grid", "65", "stationary"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = read_json(&dir.path().join("manifest.json"));
    let files: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["file"].as_str().unwrap())
        .collect();
    assert!(files.iter().any(|f| f.ends_with(".bin")));
    assert_eq!(manifest["scenario_hash"].as_str().unwrap(), sha(&sc));
    let report = files.iter().find(|f| f.ends_with("_report.json")).unwrap();
    let r = read_json(&dir.path().join(report));
    assert!(r["mu_nk"].as_f64().unwrap() > 0.0);
}
