use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn omnipred(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omnipred"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn scenario(name: &str, horizon: &str, dir: &Path) -> std::path::PathBuf {
    let out = omnipred(&["scenario", name, "--horizon", horizon], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.join(format!("{name}.toml"));
    fs::write(&path, &out.stdout).unwrap();
    path
}

#[test]
fn run_writes_report_csv_and_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenario("realized", "150", dir.path());
    let out_dir = dir.path().join("out");
    let out = omnipred(
        &["run", "--config", config.to_str().unwrap(), "--seed", "4", "--out", out_dir.to_str().unwrap(), "--transcript"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["body"]["seed"], 4);
    assert_eq!(report["body"]["horizon"], 150);
    let csv = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(csv.starts_with("agent,scope,metric,variant,value,flag"));
    let transcript = fs::read_to_string(out_dir.join("transcript.txt")).unwrap();
    let rows = transcript.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    assert_eq!(rows.count(), 151);

    let inspected = omnipred(&["inspect", out_dir.join("transcript.txt").to_str().unwrap()], dir.path());
    assert!(String::from_utf8_lossy(&inspected.stdout).contains("rounds: 150"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "horizon = 0\n").unwrap();
    let out = omnipred(&["run", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = omnipred(&["run", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = omnipred(&["scenario", "no-such-scenario"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = omnipred(&["verify", "quick"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_prints_and_writes_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let config = scenario("downstream", "64", dir.path());
    let out_dir = dir.path().join("sweep");
    let out = omnipred(
        &[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--axis",
            "horizon=64,128",
            "--seeds",
            "0,1",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(out_dir.join("aggregate.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    let sweep: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(sweep["members"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_runs_selected_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let out = omnipred(&["verify", "fast", "--only", "p10"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("P10  PASS"));
    assert_eq!(text.lines().count(), 1);
    let out = omnipred(&["verify", "fast", "--only", "P99"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
