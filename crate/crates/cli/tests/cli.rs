use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gentropy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gentropy"))
        .args(args)
        .env_remove("GENTROPY_HORIZON")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn classify_examples() {
    let o = gentropy(&["classify", "--g", "shannon"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("G0_shannon"));

    let o = gentropy(&["classify", "--g", "power:0.5"]);
    let s = stdout(&o);
    assert!(
        s.contains("G0_infinity") && s.contains("U(2)        1.414214"),
        "{s}"
    );

    let o = gentropy(&["classify", "--g", "hc:2"]);
    assert!(stdout(&o).contains("G0_zero"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        gentropy(&["classify", "--g", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(gentropy(&["classify"]).status.code(), Some(2));
    assert_eq!(
        gentropy(&["trace", "--g", "shannon", "--system", "bernoulli:0.5,0.6"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gentropy(&["towers", "--g", "shannon", "--m", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gentropy(&["verify", "--suite", "nosuch"]).status.code(),
        Some(2)
    );
}

#[test]
fn bernoulli_trace_csv_is_constant_ln2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let o = gentropy(&[
        "trace",
        "--system",
        "bernoulli:0.5,0.5",
        "--g",
        "shannon",
        "--n",
        "40",
        "-o",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# gentropy "));
    assert!(lines.next().unwrap().starts_with("# config {"));
    assert_eq!(lines.next(), Some("n,H_n,H_n_over_n"));
    let rows: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| (r - 2f64.ln()).abs() < 1e-12));
}

#[test]
fn sturmian_trace_rate_is_small() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    let o = gentropy(&[
        "trace",
        "--system",
        "sturmian:golden",
        "--g",
        "shannon",
        "--n",
        "1000",
        "-o",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&p);
    let values = v["result"]["trace"]["values"].as_array().unwrap();
    assert_eq!(values.len(), 1000);
    assert!(values[999]["rate"].as_f64().unwrap() < 0.01);
}

#[test]
fn standard_example_trace_hits_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.json");
    let o = gentropy(&[
        "trace",
        "--system",
        "stdexample",
        "--gamma",
        "1",
        "--g",
        "power:0.5",
        "--stages",
        "3",
        "-o",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&p);
    let est = v["result"]["trace"]["limsup_est"].as_f64().unwrap();
    assert!((est - 1.0).abs() < 0.1, "{est}");
}

#[test]
fn artifacts_carry_metadata_and_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = gentropy(&[
            "verify",
            "--suite",
            "bernoulli-oracle",
            "--seed",
            "7",
            "-o",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v = read_json(&a);
    assert_eq!(v["schema"], 1);
    assert!(v["version"].as_str().unwrap().starts_with("gentropy "));
    assert_eq!(v["config"]["command"], "verify");
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["result"]["criteria"].as_array().unwrap().len(), 3);
}

#[test]
fn towers_and_construct_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let o = gentropy(&[
        "towers",
        "--g",
        "power:0.5",
        "--m",
        "1",
        "-o",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&p).unwrap();
    let ns: Vec<&str> = text
        .lines()
        .skip(3)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(ns, ["11", "14", "17", "19"]);

    let p = dir.path().join("c.json");
    let o = gentropy(&[
        "construct",
        "--g",
        "power:0.5",
        "--gamma",
        "1",
        "-o",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&p);
    let ns: Vec<u64> = v["result"]["state"]["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["n"].as_u64().unwrap())
        .collect();
    assert_eq!(ns, [2, 3, 4]);
}

#[test]
fn horizon_override_is_a_numeric_failure() {
    let o = Command::new(env!("CARGO_BIN_EXE_gentropy"))
        .args(["towers", "--g", "power:0.5", "--m", "1"])
        .env("GENTROPY_HORIZON", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sandwich_reports_bounds() {
    let o = gentropy(&[
        "sandwich",
        "--system",
        "bernoulli:0.3,0.7",
        "--g1",
        "2*shannon",
        "--g2",
        "shannon",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("lower bound ok  upper bound ok"));
}

#[test]
fn verify_towers_suite_passes() {
    let o = gentropy(&["verify", "--suite", "towers"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2 passed, 0 failed"));
}
