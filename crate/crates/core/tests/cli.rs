use std::process::Command;

use cmm::io::{read_timeseries, FieldSnapshot, SavedState};

fn cmm() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cmm"));
    c.env_remove("CMM_OUTPUT_DIR");
    c
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = cmm().args(["advect", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "n_map = 32\nn_mapp = 16\n").unwrap();
    let out = cmm().arg("advect").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn advect_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmm()
        .args(["advect", "--set", "n_map=16", "--set", "n_source=16", "--set", "n_velocity=32"])
        .args(["--set", "dt=0.125", "--set", "t_end=0.25"])
        .arg("--set")
        .arg(format!("output_dir={}", dir.path().display()))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let theta = FieldSnapshot::load(&dir.path().join("theta.snap")).unwrap();
    assert_eq!((theta.nx, theta.t), (32, 0.25));
    assert!(dir.path().join("error.csv").exists());
    assert!(dir.path().join("run.cfg").exists());
}

#[test]
fn mhd_then_zoom_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmm()
        .args(["mhd", "--set", "n_map=16", "--set", "n_source=16", "--set", "n_velocity=32"])
        .args(["--set", "t_end=0.05", "--set", "snapshot_stride=1"])
        .env("CMM_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_timeseries(&dir.path().join("timeseries.csv")).unwrap();
    assert!(rows.len() >= 2 && rows[0].t == 0.0);
    let state = SavedState::load(&dir.path().join("state.cmm")).unwrap();
    assert!((state.stack.t() - 0.05).abs() < 1e-15);
    let b = FieldSnapshot::load(&dir.path().join("b_final.snap")).unwrap();
    assert_eq!(b.components, 2);

    let zoom_dir = dir.path().join("zoom");
    let out = cmm()
        .arg("zoom")
        .arg("--state")
        .arg(dir.path().join("state.cmm"))
        .args(["--levels", "2", "--n", "16"])
        .arg("--out")
        .arg(&zoom_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let z = FieldSnapshot::load(&zoom_dir.join("zoom_j_1.snap")).unwrap();
    assert!((z.lx - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}
