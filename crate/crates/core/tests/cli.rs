use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn structmine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_structmine"))
        .args(args)
        .env_remove("STRUCTMINE_LOG_FORMAT")
        .output()
        .unwrap()
}

fn write(dir: &TempDir, name: &str, content: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn discover_prints_the_model() {
    let dir = TempDir::new().unwrap();
    let log = write(&dir, "log.txt", "a c\na b c\n");
    let steps = dir.path().join("steps.jsonl");
    let out = structmine(&["discover", "--log", &log, "--trace-steps", steps.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "(a (b?) c)\n");
    let lines = std::fs::read_to_string(&steps).unwrap();
    assert!(lines.lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
    assert!(lines.contains("\"selection2\""));
}

#[test]
fn discover_formats() {
    let dir = TempDir::new().unwrap();
    let log = write(&dir, "log.txt", "a c\na b c\n");
    let json = stdout(&structmine(&["discover", "--log", &log, "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["kind"], "seq");
    let pseudo = stdout(&structmine(&["discover", "--log", &log, "--format", "pseudocode"]));
    assert_eq!(pseudo, "a\nif (.):\n  b\nc\n");
    let dot = stdout(&structmine(&["discover", "--log", &log, "--format", "dot"]));
    assert!(dot.starts_with("digraph"));
}

#[test]
fn csv_logs_are_detected_by_extension() {
    let dir = TempDir::new().unwrap();
    let log = write(
        &dir,
        "log.csv",
        "case,activity,time\n1,a,2024-01-01T00:00:02Z\n1,c,2024-01-01T00:00:03Z\n2,a,2024-01-01T00:00:00Z\n2,b,2024-01-01T00:00:01Z\n2,c,2024-01-01T00:00:05Z\n",
    );
    let out = structmine(&["discover", "--log", &log, "--timestamp-column", "time"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), "(a (b?) c)\n");
}

#[test]
fn log_format_default_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let log = write(&dir, "log.data", "case,activity\n1,a\n1,b\n");
    let out = Command::new(env!("CARGO_BIN_EXE_structmine"))
        .args(["discover", "--log", &log])
        .env("STRUCTMINE_LOG_FORMAT", "csv")
        .output()
        .unwrap();
    assert_eq!(stdout(&out), "(a b)\n");
}

#[test]
fn eval_against_truth() {
    let dir = TempDir::new().unwrap();
    let log = write(&dir, "log.txt", "a b\n");
    let model = write(&dir, "model.expr", "(a b)\n");
    let out = structmine(&["eval", "--log", &log, "--model", &model, "--truth", "(a b)", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["synthesis"]["exact_match"], true);
    assert_eq!(v["synthesis"]["edit_distance"], 0);
    assert_eq!(v["metrics"]["fitness"], 1.0);
    let text = stdout(&structmine(&["eval", "--log", &log, "--model", "(a b)"]));
    assert_eq!(text.lines().next().unwrap(), "metric                 value");
}

#[test]
fn bench_is_byte_identical_across_runs() {
    let args = ["bench", "--seed", "11", "--programs", "30", "--traces", "6", "--no-duplicates", "--json"];
    let a = structmine(&args);
    let b = structmine(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["programs"], 30);
}

#[test]
fn bench_writes_per_program_lines() {
    let dir = TempDir::new().unwrap();
    let results = dir.path().join("rows.jsonl");
    let out = structmine(&[
        "bench", "--seed", "2", "--programs", "10", "--no-duplicates", "--results", results.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = std::fs::read_to_string(results).unwrap();
    assert_eq!(rows.lines().count(), 10);
}

#[test]
fn dfg_output() {
    let dir = TempDir::new().unwrap();
    let log = write(&dir, "log.txt", "a b\na b\n");
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&structmine(&["dfg", "--log", &log, "--format", "json"]))).unwrap();
    let edges = v["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 3);
    assert!(edges.iter().all(|e| e["frequency"] == 2));
}

#[test]
fn input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.txt");
    let out = structmine(&["discover", "--log", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());

    let reserved = write(&dir, "bad.txt", "a ^ b\n");
    assert_eq!(structmine(&["discover", "--log", &reserved]).status.code(), Some(1));

    let empty = write(&dir, "empty.txt", "\n\n");
    assert_eq!(structmine(&["discover", "--log", &empty]).status.code(), Some(1));

    let log = write(&dir, "log.txt", "a b\n");
    assert_eq!(structmine(&["eval", "--log", &log, "--model", "(a b"]).status.code(), Some(1));

    let csv = write(&dir, "log.csv", "case,activity\n1,a\n");
    assert_eq!(structmine(&["discover", "--log", &csv, "--case-column", "id"]).status.code(), Some(1));

    assert_eq!(structmine(&["discover"]).status.code(), Some(1));
    assert_eq!(structmine(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(structmine(&["bench", "--programs", "0"]).status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let out = structmine(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("discover"));
    assert!(Path::new(env!("CARGO_BIN_EXE_structmine")).exists());
}
