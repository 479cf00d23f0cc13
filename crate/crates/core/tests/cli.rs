use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TOY: &str = "x,y\n7,5\n7,7\n9,4\n5,4\n14,9\n0,9\n7,-3\n19,20\n";

fn toy_csv(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("toy.csv");
    std::fs::write(&path, TOY).unwrap();
    path
}

fn bagwhisker(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bagwhisker"))
        .args(args)
        .env_remove("BAGWHISKER_SEED")
        .output()
        .expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("error record on stderr");
    serde_json::from_str(line).expect("stderr holds JSON")
}

#[test]
fn svg_to_stdout() {
    let dir = TempDir::new().unwrap();
    let csv = toy_csv(&dir);
    let out = bagwhisker(&["--input", arg(&csv)]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches(r#"class="outlier""#).count(), 1);
}

#[test]
fn json_report_by_header_names() {
    let dir = TempDir::new().unwrap();
    let csv = toy_csv(&dir);
    let out = bagwhisker(&["--input", arg(&csv), "--x", "x", "--y", "y", "--method", "pfer", "--format", "json"]);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["kind"], "adaptive");
    assert_eq!(report["outliers"], serde_json::json!([7]));
    assert_eq!(report["lambda"], 8.0);
    assert_eq!(report["level"], 0.5);
}

#[test]
fn classic_method() {
    let dir = TempDir::new().unwrap();
    let csv = toy_csv(&dir);
    let out = bagwhisker(&["--input", arg(&csv), "--method", "classic", "--format", "json"]);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["kind"], "classic");
    assert_eq!(report["outliers"], serde_json::json!([4, 5, 6, 7]));
}

#[test]
fn both_formats_then_rerender() {
    let dir = TempDir::new().unwrap();
    let csv = toy_csv(&dir);
    let base = dir.path().join("plot");
    let out = bagwhisker(&["--input", arg(&csv), "--compare", "--format", "both", "--output", arg(&base)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(base.with_extension("svg")).unwrap();
    assert_eq!(svg.matches(r#"class="panel""#).count(), 4);

    let again = dir.path().join("again.svg");
    let json = base.with_extension("json");
    let out = bagwhisker(&["--from-json", arg(&json), "--output", arg(&again)]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(again).unwrap(), svg);
}

#[test]
fn missing_input_file() {
    let out = bagwhisker(&["--input", "/nonexistent/data.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let record = stderr_record(&out);
    assert_eq!(record["exit_code"], 2);
    assert_eq!(record["input"], "/nonexistent/data.csv");
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let csv = toy_csv(&dir);
    for args in [
        vec!["--method", "fwer"],
        vec!["--input", arg(&csv), "--level", "-0.1"],
        vec!["--input", arg(&csv), "--x", "nope"],
        vec!["--input", arg(&csv), "--compare", "--method", "fdr"],
        vec!["--input", arg(&csv), "--format", "both"],
    ] {
        let out = bagwhisker(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr_record(&out)["exit_code"], 2);
    }
}

#[test]
fn degenerate_data_is_numeric_failure() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("line.csv");
    std::fs::write(&csv, "x,y\n0,0\n1,1\n2,2\n3,3\n4,4\n5,5\n").unwrap();
    let out = bagwhisker(&["--input", arg(&csv)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn seed_from_environment() {
    let dir = TempDir::new().unwrap();
    let csv = toy_csv(&dir);
    let out = Command::new(env!("CARGO_BIN_EXE_bagwhisker"))
        .args(["--input", arg(&csv)])
        .env("BAGWHISKER_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_bagwhisker"))
        .args(["--input", arg(&csv)])
        .env("BAGWHISKER_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success());
}
