use std::path::Path;
use std::process::{Command, Output};

fn sqsep(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqsep"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn certificate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(sqsep(&["certify", "--seed", "11"], &a).status.success());
    assert!(sqsep(&["certify", "--seed", "11"], &b).status.success());
    let ca = std::fs::read(a.join("certificate.json")).unwrap();
    assert_eq!(ca, std::fs::read(b.join("certificate.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ca).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(v["config"]["seed"], 11);
    assert!(v["version"].as_str().unwrap().starts_with('v'));
}

#[test]
fn invalid_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sqsep(&["certify", "--d", "6"], dir.path()).status.code(), Some(2));
    assert_eq!(sqsep(&["certify", "--gamma", "1.2"], dir.path()).status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[explicit]\neta = 0.1\ngamma_prime = 0.1\nk = 3\n").unwrap();
    let out = sqsep(&["certify", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds"));
    let typo = dir.path().join("typo.json");
    std::fs::write(&typo, r#"{"gama": 0.3}"#).unwrap();
    assert_eq!(sqsep(&["certify", "--config", typo.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn failed_ceiling_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    std::fs::write(&cfg, "c_ceiling = 0.5\n").unwrap();
    let out = sqsep(&["certify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho_constant"));
}

#[test]
fn flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n_a": 50, "seed": 1, "epsilon": 2.0}"#).unwrap();
    let out = sqsep(&["audit-ldp", "--config", cfg.to_str().unwrap(), "--epsilon", "0.5"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("audit_ldp.json")).unwrap()).unwrap();
    assert_eq!(v["epsilon"], 0.5);
    assert_eq!(v["config"]["n_a"], 50);
}

#[test]
fn infinite_epsilon_skips_audit() {
    let dir = tempfile::tempdir().unwrap();
    let out = sqsep(&["audit-ldp", "--epsilon", "inf"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("passthrough"));
}

#[test]
fn separation_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = sqsep(&["separation", "--n-a", "4", "--learners", "lowdeg"], dir.path());
    assert!(out.status.success());
    let mut r = csv::Reader::from_path(dir.path().join("separation.csv")).unwrap();
    let headers = r.headers().unwrap().clone();
    assert_eq!(&headers[0], "learner");
    assert_eq!(r.records().count(), 4 * 2 + 1);
    let s: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("separation_summary.json")).unwrap()).unwrap();
    assert_eq!(s["identical_fraction"], 1.0);
    assert!(s["gap"].is_null());
}

#[test]
fn sweep_covers_grid() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sqsep(&["sweep"], dir.path()).status.success());
    let r = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(r.into_records().count(), 15);
}
