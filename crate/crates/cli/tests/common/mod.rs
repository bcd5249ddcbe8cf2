#![allow(dead_code)]

use assocfam_cli::{run_pipeline, Outcome, PipelineConfig};
use std::path::{Path, PathBuf};

pub const CANONICAL: [&str; 3] = ["catenoid_family", "isotropic_family", "lawson_sum"];

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn config_path(name: &str) -> PathBuf {
    workspace_root().join("configs").join(format!("{name}.toml"))
}

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"))
}

/// Runs a canonical config in-process without touching the filesystem.
pub fn run_canonical(name: &str) -> (String, Outcome) {
    let mut cfg = PipelineConfig::load(&config_path(name)).expect("canonical config loads");
    cfg.output.dir = None;
    cfg.validate().expect("canonical config validates");
    let (report, outcome) = run_pipeline(&cfg);
    (report.to_json_without_timings(), outcome)
}

pub fn blessing() -> bool {
    std::env::var("ASSOCFAM_BLESS").is_ok_and(|v| v == "1")
}

/// Compares against the stored golden file, or rewrites it when blessing.
pub fn check_golden(name: &str, json: &str) -> Result<(), String> {
    let path = golden_path(name);
    if blessing() {
        std::fs::write(&path, format!("{json}\n")).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want.trim_end() == json.trim_end() {
        return Ok(());
    }
    let line = want
        .lines()
        .zip(json.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| want.lines().count().min(json.lines().count()));
    Err(format!("{name}: report differs from {} at line {}", path.display(), line + 1))
}
