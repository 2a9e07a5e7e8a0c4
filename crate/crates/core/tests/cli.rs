use std::path::Path;
use std::process::{Command, Output};

use multimode_squeeze::io::{self, read_matrix_csv};

fn msq(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_msq"));
    cmd.args(args).env_remove("OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("OUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn scenario_and_config_are_mutually_exclusive() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario": "PdcBenchmark"}"#).unwrap();
    let o = msq(&["--scenario", "PdcBenchmark", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = msq(&[], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_inputs_exit_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let o = msq(&["--scenario", "NoSuchThing"], None);
    assert_eq!(o.status.code(), Some(2));

    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"scenario": "PdcBenchmark", "coupling": {"collection": {"waist_w0": -3}}}"#).unwrap();
    let o = msq(&["--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("coupling.collection.waist_w0"), "{}", stderr(&o));

    let o = msq(&["--config", tmp.path().join("missing.json").to_str().unwrap()], None);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn out_dir_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = msq(&["--scenario", "PsrSinglePhoton", "--quiet"], Some(tmp.path()));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join(io::MANIFEST_FILE).exists());
    assert!(o.stdout.is_empty());
}

#[test]
fn zero_gain_is_vacuum() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = msq(&["--scenario", "PdcBenchmark", "--lmax", "1", "--pmax", "1", "--seed-gain", "0", "--out", out, "--quiet"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let (labels, rows) = read_matrix_csv(&tmp.path().join("var_x1.csv")).unwrap();
    assert_eq!(labels.len(), 6);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert_eq!(*v, if i == j { 0.25 } else { 0.0 });
        }
    }
}

#[test]
fn oracle_on_small_basis() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = msq(&["--scenario", "PdcBenchmark", "--lmax", "0", "--pmax", "1", "--seed-gain", "5e-4", "--oracle", "--out", out], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("oracle: max deviation") && text.contains("agrees"), "{text}");
    let m = io::read_manifest(&tmp.path().join(io::MANIFEST_FILE)).unwrap();
    let summary = m.oracle.unwrap();
    assert!(summary.conclusive && summary.within_bound);
    assert!(tmp.path().join(io::ORACLE_FILE).exists());

    // default basis is too large for the oracle
    let o = msq(&["--scenario", "PdcBenchmark", "--oracle", "--out", out], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--lmax 0 --pmax 0"));
}

#[test]
fn convergence_check_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = msq(&["--scenario", "PsrPCrosstalk", "--convergence-check", "--out", out], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = io::read_manifest(&tmp.path().join(io::MANIFEST_FILE)).unwrap();
    let conv = m.convergence.unwrap();
    assert_eq!((conv.ell_max, conv.p_max), (2, 4));
    assert!(conv.max_drift.is_finite());
}

#[test]
fn waist_scan_prints_argmax() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = msq(&["--scenario", "WaistScan", "--out", out, "--threads", "2"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("argmax w_P"));
    let text = std::fs::read_to_string(tmp.path().join("scan_grid.csv")).unwrap();
    assert_eq!(text.lines().count(), 65);
}
