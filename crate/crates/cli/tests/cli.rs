use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use photon_cumulants_cli::output::{read_csv, BenchRow, McRow, ValueRow};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photon-cumulants")).args(args).output().unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut full = vec!["--out-dir", dir.to_str().unwrap()];
    full.extend_from_slice(args);
    let out = run(&full);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn single_value(path: PathBuf) -> f64 {
    let rows: Vec<ValueRow> = read_csv(&path).unwrap();
    assert_eq!(rows.len(), 1);
    rows[0].value
}

#[test]
fn thermal_fixture_values() {
    let dir = tempfile::tempdir().unwrap();
    let state = fixture("thermal-2mode.json");
    run_in(dir.path(), &["moment", "--state", &state, "--pattern", "1,1"]);
    let per = single_value(dir.path().join("moment.csv"));
    assert!((per - 0.53).abs() < 1e-12, "{per}");
    run_in(dir.path(), &["moment", "--state", &state, "--pattern", "1,1", "--method", "fd"]);
    let fd = single_value(dir.path().join("moment.csv"));
    assert!((fd - 0.53).abs() / 0.53 < 1e-4, "{fd}");
    run_in(dir.path(), &["cumulant", "--state", &state, "--modes", "0,1"]);
    let k2 = single_value(dir.path().join("cumulant.csv"));
    // |N_12|² = 0.09 + 0.04
    assert!((k2 - 0.13).abs() < 1e-12, "{k2}");
    assert!(dir.path().join("cumulant.manifest.json").exists());
}

#[test]
fn moment_methods_agree_on_displaced_state() {
    let dir = tempfile::tempdir().unwrap();
    let state = fixture("random-4mode.json");
    for pattern in ["1,0,2,0", "1,1,1,1", "0,3,0,1"] {
        run_in(dir.path(), &["moment", "--state", &state, "--pattern", pattern]);
        let exact = single_value(dir.path().join("moment.csv"));
        run_in(dir.path(), &["moment", "--state", &state, "--pattern", pattern, "--method", "fd"]);
        let fd = single_value(dir.path().join("moment.csv"));
        assert!((fd - exact).abs() / exact.abs() < 1e-4, "{pattern}: {fd} vs {exact}");
    }
}

#[test]
fn both_method_and_reference_agree() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["random-4mode.json", "diagonal-3mode.json", "vacuum-2mode.json"] {
        let state = fixture(name);
        let modes = if name.starts_with("random") { "0,1,2,3" } else { "0,1" };
        run_in(dir.path(), &["cumulant", "--state", &state, "--modes", modes, "--method", "both"]);
        let rows: Vec<ValueRow> = read_csv(&dir.path().join("cumulant.csv")).unwrap();
        assert_eq!(rows.len(), 2);
        run_in(dir.path(), &["cumulant", "--state", &state, "--modes", modes, "--reference"]);
        let reference = single_value(dir.path().join("cumulant.csv"));
        for r in &rows {
            assert!((r.value - reference).abs() <= 1e-10 * reference.abs().max(1.0), "{name}: {r:?}");
        }
    }
}

#[test]
fn exit_codes() {
    let state = fixture("thermal-2mode.json");
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["moment", "--state", &state, "--pattern", "1,1"]), 0);
    assert_eq!(code(&["cumulant", "--state", &state, "--modes", "0,0"]), 2);
    assert_eq!(code(&["cumulant", "--state", &state, "--modes", "0,5"]), 2);
    assert_eq!(code(&["moment", "--state", "/nonexistent/state.json", "--pattern", "1"]), 2);
    assert_eq!(code(&["moment", "--state", &state, "--pattern", "7,6"]), 3);
    assert_ne!(code(&["moment", "--state", &state]), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"version":1,"ell":1,"n":[[-1.0,0.0]],"m":[[0.0,0.0]]}"#).unwrap();
    assert_eq!(code(&["moment", "--state", bad.to_str().unwrap(), "--pattern", "1"]), 2);
    let extra = dir.path().join("extra.json");
    std::fs::write(&extra, r#"{"version":1,"ell":1,"n":[[1.0,0.0]],"m":[[0.0,0.0]],"colour":1}"#).unwrap();
    assert_eq!(code(&["moment", "--state", extra.to_str().unwrap(), "--pattern", "1"]), 2);
}

#[test]
fn montecarlo_csv_round_trip_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("smoke.toml");
    run_in(dir.path(), &["montecarlo", "--config", &cfg]);
    let rows: Vec<McRow> = read_csv(&dir.path().join("montecarlo.csv")).unwrap();
    // two families, K ∈ {2, 4}, orders 1..4
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.ell == 4 && r.trials == 300 && r.seed == 11 && r.std >= 0.0));
    for r in rows.iter().filter(|r| r.order == 1) {
        // every trial has the same total photon number, spread evenly in expectation
        assert!((r.mean - r.k as f64 / 4.0).abs() < 4.0 * r.std / 300f64.sqrt() + 1e-12, "{r:?}");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("montecarlo.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["command"], "montecarlo");

    run_in(dir.path(), &["--seed", "12", "montecarlo", "--config", &cfg]);
    let reseeded: Vec<McRow> = read_csv(&dir.path().join("montecarlo.csv")).unwrap();
    assert!(reseeded.iter().all(|r| r.seed == 12));
    assert_ne!(rows, reseeded);
}

#[test]
fn bench_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["bench", "--ell-min", "2", "--ell-max", "5", "--reps", "1"]);
    let rows: Vec<BenchRow> = read_csv(&dir.path().join("bench.csv")).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| (2..=5).contains(&r.ell) && r.reps == 1 && r.median_seconds >= 0.0));
    let mut algorithms: Vec<&str> = rows.iter().map(|r| r.algorithm.as_str()).collect();
    algorithms.dedup();
    assert!(algorithms.len() >= 2, "{algorithms:?}");
}

#[test]
fn desk_sweep_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let started = std::time::Instant::now();
    run_in(dir.path(), &["montecarlo", "--config", &fixture("desk-sweep.toml")]);
    assert!(started.elapsed().as_secs() < 600);
    let rows: Vec<McRow> = read_csv(&dir.path().join("montecarlo.csv")).unwrap();
    assert_eq!(rows.len(), 4 * 8 * 4);
    assert!(rows.iter().all(|r| r.trials == 10_000 && r.seed == 2023));
}
