use std::path::Path;
use std::process::{Command, Output};

use orikit_cli::config::DEFAULT_CONFIG;
use orikit_cli::output::{read_csv, IMU_HEADER, POSE_HEADER, STATE_HEADER};

fn orikit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orikit"))
        .args(args)
        .env_remove("ORIKIT_CONFIG")
        .output()
        .expect("binary runs")
}

fn short_config(dir: &Path, duration: f64) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    let text = DEFAULT_CONFIG.replace("duration = 60.0", &format!("duration = {duration:?}"));
    assert_ne!(text, DEFAULT_CONFIG);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn check_identities_passes() {
    let out = orikit(&["check-identities", "--samples", "200", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("checks passed"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn check_identities_is_deterministic() {
    let a = orikit(&["check-identities", "--samples", "100", "--seed", "9"]);
    let b = orikit(&["check-identities", "--samples", "100", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn injected_fault_is_caught() {
    let out = orikit(&["check-identities", "--samples", "100", "--inject-fault", "compose-sign"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn missing_config_exits_with_config_code() {
    let out = orikit(&["simulate", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, DEFAULT_CONFIG.replace("imu_rate = 200.0", "imu_rate = -1.0")).unwrap();
    let out = orikit(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_all_streams() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), 5.0);
    let out_dir = dir.path().join("out");
    let out = orikit(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("rmse "));

    let (h, truth) = read_csv(&out_dir.join("truth.csv")).unwrap();
    assert_eq!(h, STATE_HEADER);
    assert_eq!(truth.len(), 1001);
    let (h, est) = read_csv(&out_dir.join("estimate.csv")).unwrap();
    assert_eq!(h, STATE_HEADER);
    assert_eq!(est.len(), truth.len());
    let (h, imu) = read_csv(&out_dir.join("imu.csv")).unwrap();
    assert_eq!(h, IMU_HEADER);
    assert_eq!(imu.len(), truth.len());
    let (h, pose) = read_csv(&out_dir.join("pose.csv")).unwrap();
    assert_eq!(h, POSE_HEADER);
    assert_eq!(pose.len(), 50);
    for row in &est {
        let q = &row[7..11];
        assert!((q.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }
    assert!(out_dir.join("summary.txt").exists());
}

#[test]
fn seed_flag_changes_noise_but_not_motion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), 2.0);
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (seed, d) in [("1", &a), ("2", &b)] {
        let out = orikit(&["simulate", "--config", cfg, "--seed", seed, "--out", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let kinematics = |d: &Path| -> Vec<Vec<f64>> {
        let (_, rows) = read_csv(&d.join("truth.csv")).unwrap();
        rows.into_iter().map(|r| r[..11].to_vec()).collect()
    };
    assert_eq!(kinematics(&a), kinematics(&b));
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_ne!(read(&a, "imu.csv"), read(&b, "imu.csv"));
}

#[test]
fn config_is_taken_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), 1.0);
    let out_dir = dir.path().join("env-out");
    let out = Command::new(env!("CARGO_BIN_EXE_orikit"))
        .args(["simulate", "--out", out_dir.to_str().unwrap()])
        .env("ORIKIT_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, truth) = read_csv(&out_dir.join("truth.csv")).unwrap();
    assert_eq!(truth.len(), 201);
}
