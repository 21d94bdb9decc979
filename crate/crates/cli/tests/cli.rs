use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const K2: &str = r#"{"n": 2, "edges": [{"tail": [0, 1], "head": [0, 1], "w": 1.0}]}"#;

const PATH: &str = r#"{
  "vertices": ["a", "v", "b"],
  "stationary": ["a", "b"],
  "weight_mode": "unit",
  "edges": [
    {"tail": ["a", "v"], "head": ["a", "v"], "w": 1},
    {"tail": ["v", "b"], "head": ["v", "b"], "w": 1}
  ]
}"#;

const LABELS: &str = r#"{"labels": {"a": 0.0, "b": 1.0}}"#;

fn hyperdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperdiff")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn spectral_k2() {
    let dir = TempDir::new().unwrap();
    let k2 = write(&dir, "k2.json", K2);
    let v = json_of(&hyperdiff(&["spectral", "--input", s(&k2), "--restarts", "8"]));
    assert!((v["gamma2"].as_f64().unwrap() - 2.0).abs() < 1e-3);
    assert!(v["residual"].as_f64().unwrap() < 1e-3);
    assert_eq!(v["S"].as_array().unwrap().len(), 1);
}

#[test]
fn expansion_exact_k2() {
    let dir = TempDir::new().unwrap();
    let k2 = write(&dir, "k2.json", K2);
    let v = json_of(&hyperdiff(&["expansion", "--input", s(&k2), "--exact"]));
    assert_eq!(v["phi_H"].as_f64().unwrap(), 1.0);
    assert_eq!(v["exact"], Value::Bool(true));
}

#[test]
fn expansion_sweep_bounds_exact() {
    let dir = TempDir::new().unwrap();
    let k2 = write(&dir, "k2.json", K2);
    let v = json_of(&hyperdiff(&["expansion", "--input", s(&k2)]));
    assert!(v["phi_H"].as_f64().unwrap() >= 1.0 - 1e-12);
    assert_eq!(v["exact"], Value::Bool(false));
}

#[test]
fn sssl_path() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "path.json", PATH);
    let labels = write(&dir, "labels.json", LABELS);
    for mode in ["diffusion", "subgradient"] {
        let v = json_of(&hyperdiff(&["sssl", "--input", s(&path), "--labels", s(&labels), "--mode", mode]));
        let f = v["f"].as_array().unwrap();
        assert!((f[1].as_f64().unwrap() - 0.5).abs() < 1e-4, "{mode}: {f:?}");
        assert!((v["Q"].as_f64().unwrap() - 0.25).abs() < 1e-6);
    }
}

#[test]
fn diffuse_csv_and_densities() {
    let dir = TempDir::new().unwrap();
    let k2 = write(&dir, "k2.json", K2);
    let init = write(&dir, "f0.json", "[1.0, 0.0]");
    let csv = dir.path().join("out.csv");
    let dens = dir.path().join("dens.jsonl");
    let out = hyperdiff(&[
        "diffuse", "--input", s(&k2), "--init", s(&init), "--max-time", "0.01", "--step", "0.001",
        "--output", s(&csv), "--densities", s(&dens),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,Q,D,grad_norm"));
    assert_eq!(lines.count(), 11);
    let last: Value = serde_json::from_str(std::fs::read_to_string(&dens).unwrap().lines().last().unwrap()).unwrap();
    let f = last["f"].as_array().unwrap();
    // ω = (1, 1), so each Euler step scales f0 - f1 by 1 - 2h.
    let expected = 0.5 + 0.5 * (1.0f64 - 0.002).powi(10);
    assert!((f[0].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn derivatives_dump() {
    let dir = TempDir::new().unwrap();
    let k2 = write(&dir, "k2.json", K2);
    let init = write(&dir, "f.json", "[1.0, 0.0]");
    let v = json_of(&hyperdiff(&["derivatives", "--input", s(&k2), "--init", s(&init), "--order", "2"]));
    let levels = v["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 3);
    let f1: Vec<f64> = levels[1]["f"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(f1, vec![-1.0, 1.0]);
}

#[test]
fn identical_bytes_for_fixed_seed() {
    let dir = TempDir::new().unwrap();
    let k2 = write(&dir, "k2.json", K2);
    let args = ["spectral", "--input", s(&k2), "--seed", "11", "--restarts", "4"];
    let a = hyperdiff(&args);
    let b = hyperdiff(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    assert_eq!(hyperdiff(&one).stdout, a.stdout);

    let diffuse = ["diffuse", "--input", s(&k2), "--seed", "5", "--max-time", "0.05"];
    assert_eq!(hyperdiff(&diffuse).stdout, hyperdiff(&diffuse).stdout);
}

#[test]
fn verify_instance() {
    let dir = TempDir::new().unwrap();
    let k2 = write(&dir, "k2.json", K2);
    let out = hyperdiff(&["verify", "--input", s(&k2), "--vectors", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    let summary: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(summary["passed"], summary["total"]);
    assert!(text.contains("cheeger sandwich"));
}

#[test]
fn verify_acceptance_suite() {
    let out = hyperdiff(&["verify"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    let summary: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(summary["total"], 11);
    assert_eq!(summary["passed"], 11);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(hyperdiff(&[]).status.code(), Some(1));
    assert_eq!(hyperdiff(&["bogus"]).status.code(), Some(1));
    assert_eq!(hyperdiff(&["spectral"]).status.code(), Some(1));
    assert_eq!(hyperdiff(&["spectral", "--input", "x", "--restarts", "many"]).status.code(), Some(1));
    assert_eq!(hyperdiff(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(hyperdiff(&["expansion", "--input", s(&missing)]).status.code(), Some(2));

    let bad = write(&dir, "bad.json", r#"{"n": 2, "edges": [{"tail": [0], "head": [1], "w": -1}]}"#);
    let out = hyperdiff(&["expansion", "--input", s(&bad), "--exact"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let empty_head = write(&dir, "eh.json", r#"{"n": 2, "edges": [{"tail": [0], "head": [], "w": 1}]}"#);
    assert_eq!(hyperdiff(&["spectral", "--input", s(&empty_head)]).status.code(), Some(2));

    let path = write(&dir, "path.json", PATH);
    let partial = write(&dir, "labels.json", r#"{"labels": {"a": 0.0}}"#);
    assert_eq!(hyperdiff(&["sssl", "--input", s(&path), "--labels", s(&partial)]).status.code(), Some(2));

    let k2 = write(&dir, "k2.json", K2);
    let short = write(&dir, "f.json", "[1.0]");
    assert_eq!(hyperdiff(&["diffuse", "--input", s(&k2), "--init", s(&short)]).status.code(), Some(2));
    assert_eq!(hyperdiff(&["diffuse", "--input", s(&k2), "--step=0"]).status.code(), Some(2));
}
