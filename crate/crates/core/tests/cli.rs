use std::fs;
use std::process::Command;

fn ns1d() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ns1d"))
}

#[test]
fn alpha_check_reports_admissibility() {
    let out = ns1d().args(["alpha-check", "2.4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("admissible") && text.contains("true"), "{text}");

    let out = ns1d().args(["alpha-check", "2.46"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("false"));
}

#[test]
fn zero_length_run_writes_the_initial_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "N = 64\nt_end = 0\noutputs = out\n").unwrap();
    let out = ns1d().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ts = fs::read_to_string(dir.path().join("out/timeseries.csv")).unwrap();
    assert_eq!(ts.lines().count(), 2);
    assert_eq!(fs::read_to_string(dir.path().join("out/violations.csv")).unwrap().lines().count(), 1);
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "gamma = 0.5\n").unwrap();
    let out = ns1d().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));

    let out = ns1d().arg("run").arg(dir.path().join("missing.cfg")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = ns1d().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn monitor_violation_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hard.cfg");
    fs::write(
        &cfg,
        "N = 256\nt_end = 0.5\ncfl_adv = 1.0\nvelocity = sine_in_support\nvelocity_amplitude = -3\nemit_snapshots = false\noutputs = out\n",
    )
    .unwrap();
    let out = ns1d().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let v = fs::read_to_string(dir.path().join("out/violations.csv")).unwrap();
    assert!(v.lines().count() > 1);
    assert!(v.contains("xi_eta_sup_growth"), "{v}");
}

#[test]
fn ckn_check_exits_cleanly_for_the_hardy_case() {
    let out = ns1d().args(["ckn-check", "--a", "1.5", "--family", "50"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("1.5"), "{text}");
}
