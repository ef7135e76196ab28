use std::path::Path;
use std::process::{Command, Output};

use altbudget_core::operational::bundled_demo_scenario;
use serde_json::json;

fn altbudget(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altbudget"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, value: &serde_json::Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(value).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn demo_1d_plateau_prints_table() {
    let out = altbudget(&[
        "demo-1d",
        "plateau",
        "--seed",
        "42",
        "--generations",
        "500",
        "--population",
        "35",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let s = text(&out.stdout);
    assert_eq!(s.lines().filter(|l| l.starts_with("x |")).count(), 5);
    assert!(s.contains("on plateau [0.48, 0.52]"));
}

#[test]
fn demo_1d_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    let out = altbudget(&[
        "demo-1d",
        "single",
        "--generations",
        "20",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).contains("median x"));
    let body = std::fs::read_to_string(csv).unwrap();
    assert_eq!(body.lines().count(), 36);
}

#[test]
fn demo_operational_uses_project_format() {
    let out = altbudget(&["demo-operational", "--generations", "20", "--top", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let s = text(&out.stdout);
    assert!(s.contains("Project 1: "));
    assert!(s.contains("Tax evolution : "));
    assert!(s.contains("anchor v2"));
}

#[test]
fn simulate_checks_vector_lengths() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "s.json",
        &serde_json::to_value(bundled_demo_scenario()).unwrap(),
    );
    let out = altbudget(&["simulate", &scenario, "1", "2", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("expected 10 values"));

    let args = [
        "simulate", &scenario, "20", "20", "20", "20", "20", "0", "0", "0", "0", "0", "--json",
    ];
    let out = altbudget(&args);
    assert_eq!(out.status.code(), Some(0));
    let sol: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(sol["taxes"][0], 40.0);
}

#[test]
fn run_twice_gives_identical_results_files() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "demo.json",
        &serde_json::to_value(bundled_demo_scenario()).unwrap(),
    );
    let cfg = write(
        dir.path(),
        "cfg.json",
        &json!({"version": 1, "ga": {"rng_seed": 11, "generations": 40}, "problem": {"kind": "operational", "scenario": "demo.json"}}),
    );
    let mut files = Vec::new();
    for i in 0..2 {
        let results = dir.path().join(format!("r{i}.json"));
        let record = dir.path().join(format!("run{i}.json"));
        let out = altbudget(&[
            "run",
            &cfg,
            "--quiet",
            "--results",
            results.to_str().unwrap(),
            "--out",
            record.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        let rec: serde_json::Value =
            serde_json::from_slice(&std::fs::read(&record).unwrap()).unwrap();
        assert_eq!(rec["status"], "done");
        assert_eq!(rec["results"].as_array().unwrap().len(), 50);
        files.push(std::fs::read(results).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn malformed_config_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &json!({"version": 1, "ga": {"crossover_rate": "high"}, "problem": {"kind": "operational"}}),
    );
    let out = altbudget(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("ga.crossover_rate"));

    let cfg = write(
        dir.path(),
        "cfg2.json",
        &json!({"version": 1, "problem": {"kind": "operational"}, "extra": 1}),
    );
    assert_eq!(altbudget(&["run", &cfg]).status.code(), Some(2));
}

#[test]
fn infeasible_start_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &json!({
            "version": 1,
            "ga": {"init_draws_per_member": 1},
            "problem": {"kind": "operational", "constraints": {"c_max_years": 0.5}}
        }),
    );
    let out = altbudget(&["run", &cfg, "--quiet"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(text(&out.stderr).contains("feasibility ratio"));
}

#[test]
fn missing_file_and_bad_arguments() {
    assert_eq!(
        altbudget(&["run", "/nonexistent/cfg.json"]).status.code(),
        Some(1)
    );
    assert_eq!(altbudget(&["demo-1d", "triple"]).status.code(), Some(2));
    assert_eq!(altbudget(&[]).status.code(), Some(2));
}
