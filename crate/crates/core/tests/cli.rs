//! End-to-end runs of the `ssf-lab` binary.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ssf-lab");

const WEGNER: &str = r#"
experiment = "wegner"
output_dir = "out"
check = true

[model]
d = 1
L = 40

[plan]
M = 200
seed = 3

[wegner]
E0 = 2.0
eps = [0.25, 0.5, 1.0]
max_fit_residual = 0.5
"#;

fn ssf_lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env("SSF_LAB_CACHE_DIR", dir.join("cache"))
        .output()
        .expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("wegner.toml"), WEGNER).unwrap();
    dir
}

#[test]
fn smoke_run_writes_reports() {
    let dir = setup();
    let out = ssf_lab(dir.path(), &["run", "wegner.toml", "--plan.M=10"]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(2), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("eps,count_per_site"));
    assert_eq!(lines.len(), 1 + 3);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["plan"]["samples"], 10);
    assert_eq!(manifest["config"]["plan"]["M"], 10);
    assert!(manifest["config_toml"].as_str().unwrap().contains("M = 10"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "wegner");
    assert_eq!(summary["rows"].as_array().unwrap().len(), 3);
    for key in ["model_hash", "plan", "columns"] {
        assert!(summary.get(key).is_some());
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = setup();
    let a = ssf_lab(dir.path(), &["run", "wegner.toml", "--output_dir=a"]);
    let b = ssf_lab(
        dir.path(),
        &["run", "wegner.toml", "--output_dir=b", "--plan.workers=1"],
    );
    assert_eq!(a.status.code(), Some(0), "{a:?}");
    assert_eq!(b.status.code(), Some(0), "{b:?}");
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/report.csv"), read("b/report.csv"));
}

#[test]
fn manifest_config_reruns_exactly() {
    let dir = setup();
    assert_eq!(
        ssf_lab(dir.path(), &["run", "wegner.toml", "--plan.M=20", "--output_dir=first"])
            .status
            .code(),
        Some(0)
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("first/manifest.json")).unwrap()).unwrap();
    std::fs::write(dir.path().join("again.toml"), manifest["config_toml"].as_str().unwrap()).unwrap();
    assert_eq!(
        ssf_lab(dir.path(), &["run", "again.toml", "--output_dir=second"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        std::fs::read(dir.path().join("first/report.csv")).unwrap(),
        std::fs::read(dir.path().join("second/report.csv")).unwrap()
    );
}

#[test]
fn invalid_side_exits_one_and_names_the_constraint() {
    let dir = setup();
    let out = ssf_lab(dir.path(), &["run", "wegner.toml", "--model.L=2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("L must be at least 3"), "{err}");
}

#[test]
fn unknown_keys_and_syntax_errors_exit_one() {
    let dir = setup();
    let out = ssf_lab(dir.path(), &["run", "wegner.toml", "--plan.iterations=3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("iterations"));

    std::fs::write(
        dir.path().join("broken.toml"),
        "experiment = \"wegner\"\n[model\nL = 4\n",
    )
    .unwrap();
    let out = ssf_lab(dir.path(), &["run", "broken.toml"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let out = ssf_lab(dir.path(), &["run", "missing.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_check_exits_two() {
    let dir = setup();
    let out = ssf_lab(
        dir.path(),
        &["run", "wegner.toml", "--wegner.max_fit_residual=0.0", "--plan.M=5"],
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(dir.path().join("out/report.csv").exists());
}

#[test]
fn cache_commands() {
    let dir = setup();
    assert_eq!(
        ssf_lab(dir.path(), &["run", "wegner.toml", "--cache=true", "--plan.M=4"])
            .status
            .code(),
        Some(0)
    );
    let stats = ssf_lab(dir.path(), &["cache", "stats"]);
    assert!(String::from_utf8_lossy(&stats.stdout).contains("4 files"), "{stats:?}");
    let clear = ssf_lab(dir.path(), &["cache", "clear"]);
    assert!(String::from_utf8_lossy(&clear.stdout).contains("removed 4"));
    let stats = ssf_lab(dir.path(), &["cache", "stats"]);
    assert!(String::from_utf8_lossy(&stats.stdout).contains("0 files"));
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = ssf_lab(dir.path(), &["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
