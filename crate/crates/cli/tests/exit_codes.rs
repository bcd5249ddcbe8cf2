mod common;

use common::config_path;
use std::process::{Command, Output};

fn assocfam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_assocfam")).args(args).output().unwrap()
}

fn tmpdir(tag: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("assocfam-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn theta_outside_half_turn_is_a_config_error() {
    let cfg = config_path("catenoid_family");
    let out = assocfam(&["family", cfg.to_str().unwrap(), "--theta", "3pi/2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("actions[0].theta[0]"), "{err}");
    assert!(err.contains("theta out of [0,pi)"), "{err}");
}

#[test]
fn missing_config_is_exit_one() {
    let out = assocfam(&["run", "/nonexistent/assocfam.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_key_is_rejected_with_location() {
    let dir = tmpdir("badkey");
    let path = dir.join("bad.toml");
    std::fs::write(&path, "order = 8\n[surface]\ngenerator = \"catenoid\"\nradius = 2.0\n").unwrap();
    let out = assocfam(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("radius"));
}

#[test]
fn non_circular_ellipse_is_a_gate_failure() {
    let dir = tmpdir("gate");
    let cfg = config_path("lawson_sum");
    let out = assocfam(&[
        "family",
        cfg.to_str().unwrap(),
        "--ell",
        "1",
        "--theta",
        "pi/4",
        "--grid",
        "8x8",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "gate_failed");
    assert_eq!(report["failed_gate"]["gate"], "NotCircular");
    assert!(report["timings"]["total_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn out_dir_receives_report_and_csv() {
    let dir = tmpdir("csv");
    let cfg = config_path("catenoid_family");
    let out = assocfam(&["run", cfg.to_str().unwrap(), "--grid", "8x8", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.json", "points.csv", "ellipses.csv"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
    let pts = std::fs::read_to_string(dir.join("points.csv")).unwrap();
    assert!(pts.starts_with("u,v,x1,x2,x3"));
    assert_eq!(pts.lines().count(), 1 + 64);
}
