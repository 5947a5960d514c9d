use std::path::Path;
use std::process::{Command, Output};

use sis_extinction::analytic::exact_mean_extinction;
use sis_extinction::model::ModelParams;

const BIN: &str = env!("CARGO_BIN_EXE_sis-extinction");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("SIS_EXTINCTION_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn simulate_csv(dir: &Path, name: &str, threads: &str) -> String {
    let path = dir.join(name);
    let out = run(&[
        "simulate", "--bigN", "200", "--lambda", "0.6", "--mu", "1", "--x0", "150", "--n", "50",
        "--tmax", "1e6", "--seed", "11", "--threads", threads, "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate_csv(dir.path(), "a.csv", "1");
    let b = simulate_csv(dir.path(), "b.csv", "4");
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("stream_id,extinction_time,event_count,censored"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 50);
    for (i, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 4);
        assert_eq!(cols[0].parse::<usize>().unwrap(), i);
        assert!(cols[1].parse::<f64>().unwrap() > 0.0);
        assert_eq!(cols[3], "0");
    }
}

#[test]
fn censored_rows_are_flagged() {
    let out = run(&[
        "simulate", "--bigN", "20", "--lambda", "2", "--mu", "1", "--x0", "10", "--n", "3",
        "--tmax", "0.5", "--format", "csv",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("censored"));
    let text = stdout(&out);
    for row in text.lines().skip(1) {
        assert!(row.ends_with(",1"), "{row}");
        assert_eq!(row.split(',').nth(1), Some("0.5"));
    }
}

#[test]
fn simulate_requires_horizon() {
    let out = run(&["simulate", "--bigN", "20", "--lambda", "0.5", "--mu", "1", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_mean_matches_library() {
    let out = run(&[
        "exact-mean", "--bigN", "50", "--lambda", "0.5", "--mu", "1", "--x0-values", "1,5,50",
        "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,lambda,mu,x0,mean"));
    let p = ModelParams::new(50, 0.5, 1.0).unwrap();
    for (line, x0) in lines.zip([1u64, 5, 50]) {
        let mean: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        let exact = exact_mean_extinction(&p, x0).unwrap();
        assert!((mean - exact).abs() <= 1e-12 * exact, "{line}");
    }
}

#[test]
fn predict_json_has_schema_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let out = run(&[
        "predict", "--bigN", "1000", "--lambda", "0.5", "--mu", "1", "--format", "json", "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["formulas"].as_array().unwrap().len(), 4);

    // the artifact itself is accepted as a config
    let second = dir.path().join("second.json");
    let out = run(&[
        "predict", "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let w: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(v["formulas"], w["formulas"]);
}

#[test]
fn output_may_not_overwrite_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"N": 100, "lambda": 0.5, "mu": 1.0}"#).unwrap();
    let out = run(&["predict", "--config", cfg.to_str().unwrap(), "--out", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        std::fs::read_to_string(&cfg).unwrap(),
        r#"{"N": 100, "lambda": 0.5, "mu": 1.0}"#
    );
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"N": 100, "lambda": 0.5, "mu": 1.0, "bogus": 1}"#).unwrap();
    let out = run(&["predict", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_suites() {
    let out = run(&["validate", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["validate", "--suite", "a8", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("id,measured,threshold,pass,seconds"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("A8,"));
    assert_eq!(row.split(',').nth(3), Some("1"));
}

#[test]
fn invalid_parameters_fail_cleanly() {
    let out = run(&["predict", "--bigN", "0", "--lambda", "0.5", "--mu", "1"]);
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}
