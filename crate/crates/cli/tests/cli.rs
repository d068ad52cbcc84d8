use std::fs;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqrtwiener"))
        .args(args)
        .arg("--output")
        .arg(dir)
        .env_remove("SQRTWIENER_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn sha256(path: impl AsRef<Path>) -> String {
    let bytes = fs::read(path).unwrap();
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[test]
fn simulate_small_run_is_fast_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    ok(dir.path(), &["simulate", "--paths", "100", "--steps", "50"]);
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let csv = fs::read_to_string(dir.path().join("ensemble.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .contains("manifest=manifest_simulate.json"));
    assert_eq!(lines.next().unwrap(), "path_index,step_index,re,im");
    assert_eq!(lines.count(), 100 * 50);

    let m = json(dir.path().join("manifest_simulate.json"));
    assert_eq!(m["config"]["n_paths"], 100);
    assert_eq!(m["config"]["n_steps"], 50);
    assert_eq!(m["config"]["rng_name"], "chacha8-stream+box-muller");
    assert_eq!(m["files"][0]["name"], "ensemble.csv");
    assert_eq!(
        m["files"][0]["sha256"],
        sha256(dir.path().join("ensemble.csv"))
    );
    assert_eq!(m["increment_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_write_paths_downsamples() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--paths",
            "20",
            "--steps",
            "10",
            "--write-paths",
            "3",
        ],
    );
    let csv = fs::read_to_string(dir.path().join("ensemble.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 3 * 10);
}

#[test]
fn large_ensembles_are_gzipped_unless_disabled() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["simulate", "--paths", "1001", "--steps", "1000"],
    );
    let gz = dir.path().join("ensemble.csv.gz");
    let mut text = String::new();
    flate2::read::GzDecoder::new(fs::File::open(&gz).unwrap())
        .read_to_string(&mut text)
        .unwrap();
    assert_eq!(text.lines().count(), 2 + 1001 * 1000);
    let m = json(dir.path().join("manifest_simulate.json"));
    assert_eq!(m["files"][0]["name"], "ensemble.csv.gz");
    assert_eq!(m["files"][0]["sha256"], sha256(&gz));

    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--paths",
            "1001",
            "--steps",
            "1000",
            "--no-compress",
        ],
    );
    assert!(dir.path().join("ensemble.csv").exists());
}

#[test]
fn reruns_and_thread_counts_give_identical_files() {
    let args = ["table1", "--paths", "300", "--steps", "200", "--seed", "9"];
    let mut sums = Vec::new();
    for threads in ["1", "1", "3"] {
        let dir = tempfile::tempdir().unwrap();
        let mut a = args.to_vec();
        a.extend(["--threads", threads]);
        ok(dir.path(), &a);
        let m = json(dir.path().join("manifest_table1.json"));
        let csv_sum = m["files"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|f| f["name"].as_str().unwrap().ends_with(".csv"))
            .map(|f| f["sha256"].as_str().unwrap().to_string())
            .collect::<Vec<_>>();
        sums.push((
            m["increment_digest"].clone(),
            m["wiener_digest"].clone(),
            csv_sum,
        ));
    }
    assert_eq!(sums[0], sums[1]);
    assert_eq!(sums[0], sums[2]);
}

#[test]
fn invalid_config_exits_one_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["simulate", "--steps", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_steps"));

    let out = run(dir.path(), &["table1", "--mu0", "0.3", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(dir.path(), &["kernels", "--t", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t:"));

    let out = run(dir.path(), &["simulate", "--threads", "0"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(dir.path(), &["simulate", "--paths", "many"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = run(
        &blocker.join("sub"),
        &["simulate", "--paths", "2", "--steps", "2"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"n_paths": 7, "n_steps": 5, "seed": 3}"#).unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--steps",
            "4",
        ],
    );
    let m = json(dir.path().join("manifest_simulate.json"));
    assert_eq!(m["config"]["n_paths"], 7);
    assert_eq!(m["config"]["n_steps"], 4);
    assert_eq!(m["config"]["seed"], 3);

    fs::write(&cfg, r#"{"n_pathz": 7}"#).unwrap();
    let out = run(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(
        dir.path(),
        &["simulate", "--config", "/nonexistent/run.json"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sqrtwiener"))
        .args(["simulate", "--paths", "2", "--steps", "3"])
        .env("SQRTWIENER_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("manifest_simulate.json").exists());
}

#[test]
fn table1_writes_every_tag_and_the_comparison() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["table1", "--paths", "400", "--steps", "100"]);
    let csv = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 5);
    for tag in [
        "increment-normalized",
        "path-temporal",
        "published-convention",
    ] {
        assert!(rows.iter().any(|r| r.contains(tag)), "{tag}");
    }
    let r = json(dir.path().join("table1.json"));
    assert_eq!(r["published"].as_array().unwrap().len(), 2);
    assert_eq!(r["comparison"].as_array().unwrap().len(), 6);
    assert!(r["shift_artifact"]["c_fit"].as_f64().unwrap() > 0.0);
    for k in ["mean_re", "mean_im", "variance_re", "variance_im"] {
        assert!(r["per_path"][k]["histogram"]["counts"].is_array(), "{k}");
    }
    let pv_im = r["discrepancy"]["expected_pseudo_variance"][1]
        .as_f64()
        .unwrap();
    assert!((pv_im + 0.54964).abs() < 1e-4);
}

#[test]
fn seed_change_keeps_tags_and_moves_values_modestly() {
    let mut temporal = Vec::new();
    for seed in ["1", "2"] {
        let dir = tempfile::tempdir().unwrap();
        ok(
            dir.path(),
            &[
                "table1", "--paths", "2000", "--steps", "200", "--seed", seed,
            ],
        );
        let csv = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
        let tags: Vec<String> = csv
            .lines()
            .skip(2)
            .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(","))
            .collect();
        let var: f64 = csv
            .lines()
            .nth(2)
            .unwrap()
            .split(',')
            .nth(6)
            .unwrap()
            .parse()
            .unwrap();
        temporal.push((tags, var));
    }
    assert_eq!(temporal[0].0, temporal[1].0);
    assert!((temporal[0].1 - temporal[1].1).abs() < 0.02);
}

#[test]
fn kernels_report_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "kernels",
            "--paths",
            "5000",
            "--steps",
            "200",
            "--identity-points",
            "500",
        ],
    );
    let r = json(dir.path().join("kernels.json"));
    assert!(r["curve_max_abs_wick_minus_heat"].as_f64().unwrap() <= 1e-10);
    assert!(r["identity"]["max_abs_wick_minus_heat"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r["wick_source"], "squared-values");
    assert_eq!(r["wick_center_shifted"], true);
    for f in [
        "kernel_schrodinger.csv",
        "kernel_heat.csv",
        "kernel_wick.csv",
    ] {
        let csv = fs::read_to_string(dir.path().join(f)).unwrap();
        assert_eq!(csv.lines().count(), 2 + 1001, "{f}");
    }
    ok(
        dir.path(),
        &[
            "kernels",
            "--paths",
            "500",
            "--steps",
            "50",
            "--wick-source",
            "values",
            "--bins",
            "12",
        ],
    );
    let r = json(dir.path().join("kernels.json"));
    assert_eq!(r["wick_source"], "values");
    assert_eq!(
        r["wick_histogram"]["histogram"]["counts"]
            .as_array()
            .unwrap()
            .len(),
        12
    );
}

#[test]
fn fpsolve_profiles_and_stability_errors() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["fpsolve", "--profile-times", "0.05,0.1", "--levels", "3"],
    );
    let r = json(dir.path().join("fpsolve.json"));
    let profiles = r["profiles"].as_array().unwrap();
    assert_eq!(profiles.len(), 2);
    for p in profiles {
        assert!(p["max_error"].as_f64().unwrap() < 1e-4);
        assert!(dir.path().join(p["file"].as_str().unwrap()).exists());
    }
    assert_eq!(
        r["convergence"]["error_ratios"].as_array().unwrap().len(),
        2
    );

    let out = run(dir.path(), &["fpsolve", "--t-final", "3", "--levels", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modal growth"));

    let out = run(
        dir.path(),
        &[
            "fpsolve",
            "--points",
            "4001",
            "--time-steps",
            "1",
            "--levels",
            "0",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Courant"));
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = Command::new(env!("CARGO_BIN_EXE_sqrtwiener"))
            .arg(flag)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{flag}");
    }
}
