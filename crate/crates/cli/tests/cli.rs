use std::path::Path;
use std::process::{Command, Output};

use rlgames_cli::output::CsvTable;
use serde_json::Value;

fn rlgames(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlgames")).args(args).output().expect("spawn rlgames")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const BANDIT_SINGLE: &str = r#"{
    "game": "parity",
    "kernel": "logit",
    "feedback": {"kind": "bandit"},
    "exploration": {"base": 0.1, "exponent": 0.15},
    "step": {"base": 0.2, "exponent": 0.5},
    "horizon": 300,
    "seed": 4,
    "init": {"scores": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]}
}"#;

#[test]
fn analyze_reports_the_minimal_clubs() {
    let out = rlgames(&["analyze", "vz4x4"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["minimal_clubs"][0]["face"], serde_json::json!([[0], [0]]));
    assert_eq!(v["minimal_clubs"][1]["face"], serde_json::json!([[2], [2]]));
    assert_eq!(v["strict_nash"], serde_json::json!([[0, 0], [2, 2]]));
}

#[test]
fn run_writes_csv_and_report_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", BANDIT_SINGLE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = rlgames(&["run", &cfg, "-o", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = std::fs::read(a.join("trajectory.csv")).unwrap();
    assert_eq!(csv, std::fs::read(b.join("trajectory.csv")).unwrap());
    assert_eq!(std::fs::read(a.join("report.json")).unwrap(), std::fs::read(b.join("report.json")).unwrap());

    let table = CsvTable::parse(std::str::from_utf8(&csv).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 300);
    assert_eq!(table.header.iter().filter(|h| h.starts_with("dist_")).count(), 4);
    let gamma = table.column("gamma").unwrap();
    let tau = table.column("tau").unwrap();
    let mut sum = 0.0;
    for (n, (g, t)) in gamma.iter().zip(&tau).enumerate() {
        assert!((g - 0.2 / ((n + 1) as f64).sqrt()).abs() < 1e-15);
        sum += g;
        assert!((t - sum).abs() < 1e-12);
    }
    let realized = table.column("realized_0").unwrap();
    assert!(realized.iter().all(|&r| r == 0.0 || r == 1.0));

    let report: Value = serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["horizon"], 300);
    assert_eq!(report["tracked_faces"].as_array().unwrap().len(), 4);
}

#[test]
fn horizon_one_produces_a_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", &BANDIT_SINGLE.replace("\"horizon\": 300", "\"horizon\": 1"));
    let o = rlgames(&["run", &cfg, "-o", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let table = CsvTable::parse(&text).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.column("n").unwrap(), vec![1.0]);
    assert_eq!(table.column("tau").unwrap(), table.column("gamma").unwrap());
}

#[test]
fn single_point_grid_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let run_cfg = write_config(dir.path(), "run.json", BANDIT_SINGLE);
    let grid = BANDIT_SINGLE
        .replace(r#""init": {"scores": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]}"#, r#""init": {"grid": {"values": [0.0]}}"#)
        .replace("\"seed\": 4,", "\"seed\": 4, \"output\": {\"batch_trajectories\": true},");
    let batch_cfg = write_config(dir.path(), "batch.json", &grid);
    let (r, b) = (dir.path().join("r"), dir.path().join("b"));
    assert!(rlgames(&["run", &run_cfg, "-o", r.to_str().unwrap()]).status.success());
    let o = rlgames(&["batch", &batch_cfg, "-o", b.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(r.join("trajectory.csv")).unwrap(), std::fs::read(b.join("run_000.csv")).unwrap());
    let summary: Value = serde_json::from_slice(&std::fs::read(b.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 1);
}

#[test]
fn run_rejects_a_multi_point_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &BANDIT_SINGLE.replace(r#""init": {"scores": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]}"#, r#""init": {"grid": {}}"#),
    );
    let o = rlgames(&["run", &cfg, "-o", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("single initial point"));
}

#[test]
fn errors_are_json_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    for (body, needle) in [
        (BANDIT_SINGLE.replace("\"horizon\": 300", "\"horizon\": 0"), "horizon"),
        (BANDIT_SINGLE.replace("\"logit\"", "\"cubic\""), "kernel"),
        (BANDIT_SINGLE.replace("\"parity\"", "\"nope\""), "unknown game"),
        (BANDIT_SINGLE.replace(r#""exploration": {"base": 0.1, "exponent": 0.15},"#, ""), "exploration"),
        (BANDIT_SINGLE.replace("\"seed\": 4,", "\"seed\": 4, \"colour\": 1,"), "colour"),
    ] {
        let cfg = write_config(dir.path(), "bad.json", &body);
        let o = rlgames(&["run", &cfg, "-o", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        let err: Value = serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&o.stderr)));
        assert!(err["error"].as_str().unwrap().contains(needle), "{err} lacks {needle}");
    }
}

#[test]
fn verify_lists_and_filters() {
    let o = rlgames(&["verify", "--list"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 11);
    let o = rlgames(&["verify", "--filter", "1"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("[PASS]  1 "));
}

#[test]
fn verify_fails_on_a_perturbed_game() {
    let dir = tempfile::tempdir().unwrap();
    let g = rlgames_core::builtin::vz4x4();
    let mut file = g.to_file();
    // Raising u_0(B, B) changes the regret gap of the correlated distribution.
    file.payoffs[0][5] += 0.5;
    let path = dir.path().join("vz.json");
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
    let o = rlgames(&["verify", "--filter", "1", "--vz", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("[FAIL]  1 "));
}
