use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TETRA: &str = r#"{"effects":[
  {"mu":0.25,"mhat":[0.5773502691896258,0.5773502691896258,0.5773502691896258]},
  {"mu":0.25,"mhat":[0.5773502691896258,-0.5773502691896258,-0.5773502691896258]},
  {"mu":0.25,"mhat":[-0.5773502691896258,0.5773502691896258,-0.5773502691896258]},
  {"mu":0.25,"mhat":[-0.5773502691896258,-0.5773502691896258,0.5773502691896258]}]}"#;

const Z_PVM: &str = r#"{"effects":[{"mu":0.5,"mhat":[0,0,1]},{"mu":0.5,"mhat":[0,0,-1]}],"r":0.9}"#;

fn steerkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steerkit"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tetra.json"), TETRA).unwrap();
    std::fs::write(dir.path().join("z.json"), Z_PVM).unwrap();
    dir
}

fn csv_rows(path: &Path) -> Vec<(String, String, f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("series,label,x,y"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn simulate3_random_sweep_passes() {
    let dir = workdir();
    let out = steerkit(dir.path(), &["simulate3", "--random", "1000", "--seed", "1", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("r.json"));
    assert_eq!(report["status"], "pass");
    assert_eq!(report["summary"]["samples"], 1000);
    assert!(report["summary"]["max_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report["header"]["schema_version"], 1);
    assert_eq!(report["header"]["command"], "simulate3");
    let first = &report["results"][0];
    assert_eq!(first["parent"]["regions"].as_array().unwrap().len(), 6);
    assert!(first["xy"]["X"].is_number() && first["xy"]["Y"].is_number());
}

#[test]
fn coarse_grid_fails_with_replayable_counterexample() {
    let dir = workdir();
    let out = steerkit(
        dir.path(),
        &["simulate4", "--povm", "tetra.json", "--grid", "product:3x4", "--out", "t.json"],
    );
    assert_eq!(out.status.code(), Some(1));
    let report = read_json(&dir.path().join("t.json"));
    assert_eq!(report["status"], "fail");
    let ce_path = dir.path().join("t.counterexample.json");
    assert_eq!(report["counterexample"].as_str().unwrap(), "t.counterexample.json");
    let ce = read_json(&ce_path);
    assert_eq!(ce["command"]["name"], "simulate4");
    assert_eq!(ce["command"]["grid"], "product:3x4");

    let replay = steerkit(
        dir.path(),
        &["simulate4", "--replay", "t.counterexample.json", "--out", "again.json"],
    );
    assert_eq!(replay.status.code(), Some(1));
    let again = read_json(&dir.path().join("again.json"));
    assert_eq!(again["summary"]["max_residual"], report["summary"]["max_residual"]);
    assert_eq!(again["header"]["config"]["command"]["grid"], "product:3x4");

    let wrong = steerkit(dir.path(), &["simulate3", "--replay", "t.counterexample.json"]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn simulate4_report_schema_and_convergence_csv() {
    let dir = workdir();
    let out = steerkit(
        dir.path(),
        &["simulate4", "--random", "3", "--seed", "5", "--out", "r.json", "--csv", "c.csv"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("r.json"));
    let rec = &report["results"][0];
    assert_eq!(rec["parent"]["regions"].as_array().unwrap().len(), 18);
    assert_eq!(rec["pairing"], "12-34");
    assert_eq!(rec["split"]["kappa"].as_array().unwrap().len(), 2);
    assert_eq!(rec["residual_convergence"].as_array().unwrap().len(), 5);
    assert_eq!(report["header"]["grid"]["nodes"], 5810);
    assert_eq!(report["header"]["grid"]["checksum"].as_str().unwrap().len(), 64);

    let rows = csv_rows(&dir.path().join("c.csv"));
    let residuals: Vec<_> = rows.iter().filter(|r| r.0 == "residual").collect();
    assert_eq!(residuals.len(), 15);
    assert!(residuals.iter().all(|r| r.3 > 0.0));
    assert!(rows.iter().any(|r| r.0 == "reference" && r.2 == 0.5));
}

#[test]
fn reports_are_deterministic_apart_from_timestamp() {
    let dir = workdir();
    let strip = |name: &str| {
        let mut v = read_json(&dir.path().join(name));
        v["header"]["timestamp"] = Value::Null;
        v["header"]["config"]["out"] = Value::Null;
        v
    };
    for name in ["a.json", "b.json"] {
        let out = steerkit(dir.path(), &["simulate4", "--random", "4", "--seed", "9", "--out", name]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(strip("a.json"), strip("b.json"));
}

#[test]
fn lhs_check_examples() {
    let dir = workdir();
    for (r, n) in [("0.5", "100"), ("0.3", "100"), ("0.0", "10")] {
        let out = steerkit(
            dir.path(),
            &["lhs-check", "--r", r, "--n", n, "--grid", "lebedev:131", "--seed", "3", "--out", "l.json"],
        );
        assert_eq!(out.status.code(), Some(0), "r = {r}");
        let report = read_json(&dir.path().join("l.json"));
        assert!(report["summary"]["max_lhs_residual"].as_f64().unwrap() <= 2e-3);
        assert!(report["summary"]["max_marginal_violation"].as_f64().unwrap() <= 1e-12);
    }
    let out = steerkit(dir.path(), &["lhs-check", "--r", "0.7", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn radius_scan_is_monotone() {
    let dir = workdir();
    let out = steerkit(
        dir.path(),
        &["radius", "--parent", "tetra.json", "--n", "120", "--seed", "2", "--out", "r.json", "--csv", "r.csv", "--scan-points", "26"],
    );
    assert_eq!(out.status.code(), Some(0));
    let r_star = read_json(&dir.path().join("r.json"))["summary"]["r_star"].as_f64().unwrap();
    assert!((r_star - 1.0 / 3.0).abs() < 0.01, "tetrahedral PVM radius {r_star}");
    let rows = csv_rows(&dir.path().join("r.csv"));
    let fractions: Vec<f64> = rows.iter().filter(|r| r.0 == "feasible_fraction").map(|r| r.3).collect();
    assert_eq!(fractions.len(), 26);
    assert!(fractions.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(fractions[0], 1.0);
    let refs: Vec<&str> = rows.iter().filter(|r| r.0 == "reference").map(|r| r.1.as_str()).collect();
    assert_eq!(refs, ["5/12", "0.4517", "1/2"]);
}

#[test]
fn farkas_reports_witnesses() {
    let dir = workdir();
    let out = steerkit(dir.path(), &["farkas", "--parent", "tetra.json", "--child", "z.json", "--out", "f.json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("f.json"));
    assert_eq!(report["summary"]["verdict"], "infeasible");
    let y = report["results"]["outcome"]["certificate"]["y"].as_array().unwrap();
    assert_eq!(y.len(), 12);

    let out = steerkit(
        dir.path(),
        &["farkas", "--parent", "tetra.json", "--child", "z.json", "--r", "0.3", "--out", "f.json"],
    );
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("f.json"));
    assert_eq!(report["summary"]["verdict"], "feasible");
    assert_eq!(report["results"]["outcome"]["x"].as_array().unwrap().len(), 8);
    for col in 0..4 {
        let s: f64 = (0..2)
            .map(|a| report["results"]["response"][a][col].as_f64().unwrap())
            .sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
}

#[test]
fn separation_reports_both_thresholds() {
    let dir = workdir();
    let out = steerkit(dir.path(), &["separation", "--n", "400", "--out", "s.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = &read_json(&dir.path().join("s.json"))["summary"];
    assert!((s["pvm_radius"].as_f64().unwrap() - 0.3714).abs() <= 0.002);
    assert!((s["certificate_threshold"].as_f64().unwrap() - 0.3220).abs() < 1e-4);
}

#[test]
fn stress_sweep_passes() {
    let dir = workdir();
    let out = steerkit(dir.path(), &["stress", "--n", "40", "--seed", "4", "--out", "s.json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&dir.path().join("s.json"));
    assert_eq!(report["summary"]["feasible"], 40);
    assert_eq!(report["results"][0]["regions"], 14);
}

#[test]
fn usage_errors_exit_2() {
    let dir = workdir();
    std::fs::write(dir.path().join("bad.json"), "{\"effects\":").unwrap();
    assert_eq!(steerkit(dir.path(), &["simulate3", "--povm", "bad.json"]).status.code(), Some(2));
    assert_eq!(steerkit(dir.path(), &["simulate4", "--grid", "healpix:8", "--random", "1"]).status.code(), Some(2));
    assert_eq!(steerkit(dir.path(), &["simulate4", "--grid", "lebedev:7", "--random", "1"]).status.code(), Some(2));
    assert_eq!(steerkit(dir.path(), &["simulate3"]).status.code(), Some(2));
    assert_eq!(steerkit(dir.path(), &["simulate3", "--povm", "tetra.json"]).status.code(), Some(2));
}
