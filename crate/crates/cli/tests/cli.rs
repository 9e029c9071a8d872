//! End-to-end checks of the binary: exit codes, artifact layout, overrides,
//! and byte-level determinism across reruns and worker counts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn grbm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grbm"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    grbm().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const OY2: &str = r#"{"d": 2, "gamma": [1.0, 0.0, 0.0, 1.0], "mu": [-1.0, -1.0],
                      "refl": "tridiagonal",
                      "potential": {"family": "exponential", "beta": 1.0}}"#;

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(
        dir.path(),
        "good.json",
        &format!(
            r#"{{"kind": "validate", "model": {OY2}, "output_dir": {:?}}}"#,
            dir.path().join("out-good")
        ),
    );
    let out = run(&["validate", "--config", good.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out-good/report.json").exists());
    assert!(dir.path().join("out-good/manifest.json").exists());

    // Positive drift fails the stability gate: exit 1.
    let bad = write_config(
        dir.path(),
        "bad.json",
        &format!(
            r#"{{"kind": "validate",
                 "model": {{"d": 2, "gamma": [1.0, 0.0, 0.0, 1.0], "mu": [-1.0, 1.0],
                           "refl": "tridiagonal",
                           "potential": {{"family": "exponential", "beta": 1.0}}}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out-bad")
        ),
    );
    let out = run(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    // Malformed JSON: exit 2 with a parse diagnostic.
    let broken = write_config(dir.path(), "broken.json", "{not json");
    let out = run(&["validate", "--config", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("config parse"));
}

#[test]
fn strict_schema_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "extra.json",
        &format!(
            r#"{{"kind": "validate", "model": {OY2}, "typo_key": 1,
                 "output_dir": {:?}}}"#,
            dir.path().join("out")
        ),
    );
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let cfg = write_config(
        dir.path(),
        "extra2.json",
        &format!(
            r#"{{"kind": "drift-check", "model": {OY2},
                 "analysis": {{"n_samples": 100, "bogus": true}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out2")
        ),
    );
    let out = run(&["drift-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn kind_must_match_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "kind.json",
        &format!(
            r#"{{"kind": "simulate", "model": {OY2}, "output_dir": {:?}}}"#,
            dir.path().join("out")
        ),
    );
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn drift_check_writes_samples_and_respects_stability() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "drift.json",
        &format!(
            r#"{{"kind": "drift-check", "model": {OY2},
                 "run": {{"seed": 3}},
                 "analysis": {{"lambda": 0.5, "n_samples": 2000}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out")
        ),
    );
    let out = run(&["drift-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let samples = fs::read_to_string(dir.path().join("out/samples.csv")).unwrap();
    assert!(samples.starts_with("idx,radius,lv_over_v\n"));
    assert_eq!(samples.lines().count(), 2001);

    // Unstable drift vector: stability gate, exit 1.
    let cfg = write_config(
        dir.path(),
        "unstable.json",
        &format!(
            r#"{{"kind": "drift-check",
                 "model": {{"d": 2, "gamma": [1.0, 0.0, 0.0, 1.0], "mu": [1.0, -1.0],
                           "refl": "tridiagonal",
                           "potential": {{"family": "exponential", "beta": 1.0}}}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out-unstable")
        ),
    );
    let out = run(&["drift-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn simulate_single_path_and_blowup_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.json",
        &format!(
            r#"{{"kind": "simulate", "model": {OY2},
                 "run": {{"dt": 0.01, "t": 1.0, "n_paths": 1, "seed": 5}},
                 "analysis": {{"x0": [0.0, 1.0]}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out")
        ),
    );
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2\n"));
    assert_eq!(csv.lines().count(), 102);
    assert!(dir.path().join("out/trajectory.svg").exists());

    // Plain Euler from an extreme state blows up: exit 3, no artifacts.
    let cfg = write_config(
        dir.path(),
        "blow.json",
        &format!(
            r#"{{"kind": "simulate",
                 "model": {{"d": 1, "gamma": [1.0], "mu": [-1.0], "refl": "tridiagonal",
                           "potential": {{"family": "exponential", "beta": 1.0}}}},
                 "run": {{"dt": 0.001, "t": 0.1, "n_paths": 1, "seed": 5}},
                 "analysis": {{"x0": [-600.0], "scheme": "euler-maruyama"}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out-blow")
        ),
    );
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(!dir.path().join("out-blow/manifest.json").exists());
}

#[test]
fn seed_and_set_overrides_reach_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.json",
        &format!(
            r#"{{"kind": "simulate", "model": {OY2},
                 "run": {{"dt": 0.01, "t": 0.5, "n_paths": 4, "seed": 1}},
                 "analysis": {{"x0": [0.0, 1.0]}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out")
        ),
    );
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert_eq!(code(&out), 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 99);

    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "run.seed=123",
        "--out",
        dir.path().join("out-set").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("out-set/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"], 123);
}

#[test]
fn stationary_check_d2_factorized_marginals_pass() {
    // Gamma = I, R = I satisfies skew-symmetry trivially; the product-form
    // density factorizes and each coordinate marginal passes one-sample KS.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "stat2.json",
        &format!(
            r#"{{"kind": "stationary-check",
                 "model": {{"d": 2, "gamma": [1.0, 0.0, 0.0, 1.0], "mu": [-1.0, -1.0],
                           "refl": [1.0, 0.0, 0.0, 1.0],
                           "potential": {{"family": "exponential", "beta": 1.0}}}},
                 "run": {{"dt": 0.002, "t": 20.0, "n_paths": 5000, "seed": 17}},
                 "analysis": {{"n_quad": 600, "cdf_panels": 4096}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out")
        ),
    );
    let out = run(&["stationary-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(report["ks_pass"], true);
    assert_eq!(report["ks"].as_array().unwrap().len(), 2);
    // Joint normalization factorizes into (1/4)^2.
    let z = report["normalization"].as_f64().unwrap();
    assert!((z - 0.0625).abs() < 1e-8, "z = {z}");
    assert!(dir.path().join("out/density.svg").exists());
}

#[test]
fn penalty_limit_requires_hard_reference() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "pen.json",
        &format!(
            r#"{{"kind": "penalty-limit", "model": {OY2},
                 "analysis": {{"betas": [1.0, 2.0]}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out")
        ),
    );
    let out = run(&["penalty-limit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn rate_scaling_single_dimension_gives_table_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "rates.json",
        &format!(
            r#"{{"kind": "rate-scaling", "analysis": {{"d_list": [8]}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out")
        ),
    );
    let out = run(&["rate-scaling", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert!(report["slope_hard"].is_null());
    let csv = fs::read_to_string(dir.path().join("out/rates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    // Unstable pattern: exit 1.
    let cfg = write_config(
        dir.path(),
        "rates-bad.json",
        &format!(
            r#"{{"kind": "rate-scaling",
                 "analysis": {{"d_list": [8], "nu_target": 1.0}},
                 "output_dir": {:?}}}"#,
            dir.path().join("out2")
        ),
    );
    let out = run(&["rate-scaling", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

fn artifact_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn reruns_and_worker_counts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "mix.json",
        &format!(
            r#"{{"kind": "mixing",
                 "model": {{"d": 1, "gamma": [1.0], "mu": [-1.0], "refl": "tridiagonal",
                           "potential": {{"family": "exponential", "beta": 1.0}}}},
                 "run": {{"dt": 0.01, "t": 6.0, "n_paths": 400, "seed": 21}},
                 "analysis": {{"x0": [[-2.0], [4.0]],
                              "times": [1.0, 2.0, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0],
                              "window": [0.0, 6.0]}},
                 "output_dir": {:?}}}"#,
            dir.path().join("a")
        ),
    );
    let out = run(&["mixing", "--config", cfg.to_str().unwrap(), "--workers", "1"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let out = run(&[
        "mixing",
        "--config",
        cfg.to_str().unwrap(),
        "--workers",
        "8",
        "--out",
        dir.path().join("b").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let a = artifact_bytes(&dir.path().join("a"));
    let b = artifact_bytes(&dir.path().join("b"));
    assert_eq!(a.len(), b.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "artifact {name_a} differs across workers");
    }
}
