use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elliptic-nf")).args(args).output().expect("spawn binary")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value) -> f64 {
    match v {
        Value::String(s) => s.parse().unwrap(),
        other => other.as_f64().unwrap(),
    }
}

#[test]
fn normalize_reports_the_first_torsion_coefficient() {
    let doc = json(&["normalize", "--order", "6"]);
    assert_eq!(doc["command"], "normalize");
    assert_eq!(doc["gauge"], "basic");
    let n1 = doc["n"].as_array().unwrap().iter().find(|t| t["s"] == 1).unwrap();
    // -Im(pi lambda / (1 - lambda)) at the golden mean
    let omega = (5f64.sqrt() - 1.0) / 2.0;
    let (c, s) = ((std::f64::consts::TAU * omega).cos(), (std::f64::consts::TAU * omega).sin());
    let den = (1.0 - c).powi(2) + s * s;
    let im = (s * (1.0 - c) + c * s) / den;
    assert!((num(&n1["value"]) + std::f64::consts::PI * im).abs() < 1e-12);
    assert!(num(&doc["residual"]) < 1e-60);
}

#[test]
fn output_is_deterministic() {
    let args = ["diagnose", "--family", "B", "--order", "10", "--depth", "12"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bits_come_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_elliptic-nf"))
        .env("ELLIPTIC_NF_BITS", "128")
        .args(["normalize", "--order", "4"])
        .output()
        .unwrap();
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["bits"], 128);
}

#[test]
fn errors_are_json_with_exit_codes() {
    let out = run(&["normalize", "--omega", "0.5", "--order", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["module"], "normalizer");
    assert_eq!(err["code"], "normalizer.exact_resonance");

    let out = run(&["normalize", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], "cli.config");
    assert!(out.stdout.is_empty());
}

#[test]
fn neumann_flags_a_wrong_torsion() {
    let doc = json(&["neumann", "--n-deviation", "k=1", "--ladder", "25600"]);
    assert_eq!(doc["run"]["verdict"], "diverging");
    assert!(num(&doc["run"]["exponent"]) >= -1.0);
    assert_eq!(doc["deviation"]["k"], 1);
}

#[test]
fn tongues_write_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&[
        "--out",
        dir.path().to_str().unwrap(),
        "tongues",
        "--family",
        "arnold",
        "--t",
        "0",
        "--range",
        "0,1",
        "--grid",
        "31",
        "--q-max",
        "4",
        "--iterations",
        "1024",
    ]);
    assert_eq!(num(&doc["max_width"]), 0.0);
    let plateaus = std::fs::read_to_string(dir.path().join("plateaus.csv")).unwrap();
    assert!(plateaus.lines().count() > 1);
    for line in plateaus.lines().skip(1) {
        assert_eq!(line.split(',').nth(5), Some("0"), "{line}");
    }
    let csv = std::fs::read_to_string(dir.path().join("tongues.csv")).unwrap();
    assert_eq!(csv.lines().count(), 32);
    let svg = std::fs::read_to_string(dir.path().join("tongues.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn out_file_and_growth_csv() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let growth = dir.path().join("growth.csv");
    let out = run(&[
        "--out",
        report.to_str().unwrap(),
        "diagnose",
        "--order",
        "10",
        "--depth",
        "10",
        "--growth-csv",
        growth.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["report"]["brjuno"]["brjuno"], true);
    let csv = std::fs::read_to_string(&growth).unwrap();
    assert!(csv.starts_with("degree,max_coeff,root_test,min_small_divisor"));
}

#[test]
fn every_subcommand_runs() {
    let t = json(&["transform", "--order", "16"]);
    assert_eq!(t["result"]["r"], 1);
    assert!(num(&t["result"]["residual"]) < 1e-20);
    let g = json(&["transform", "--kind", "gauge", "--gauge-a", "0,0.5", "--order", "8"]);
    assert_eq!(g["command"], "transform");
    let s = json(&["sternberg", "--order", "8"]);
    for row in s["table"].as_array().unwrap() {
        assert!(num(&row["conjugacy_defect"]) < 1e-10);
        assert!(num(&row["radius_defect"]) < 1e-12);
    }
    let c = json(&["contraction", "--order", "8"]);
    assert_eq!(c["bounds"]["certification"]["passed"], true);
}
