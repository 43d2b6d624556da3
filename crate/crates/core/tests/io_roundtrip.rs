use std::fs;

use ns1d::diagnostics::DiagRecord;
use ns1d::io::{
    emit_snapshot, emit_timeseries, load_snapshot, load_timeseries, parse_config, timeseries_header, Config,
};
use ns1d::model::make_grid;
use ns1d::solver::{run, DensityKind, InitialProfile, MemorySink, VelocityKind};
use ns1d::{Params, State};

#[test]
fn snapshot_survives_a_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let grid = make_grid(3.0, 24).unwrap();
    let rho: Vec<f64> = grid.centers.iter().map(|x| (1.0 - x * x / 4.0).max(0.0).powi(3)).collect();
    let mut u: Vec<f64> = grid.faces.iter().map(|x| 0.1 * x.sin() / 3.0).collect();
    u[0] = 0.0;
    u[24] = 0.0;
    let state = State::new(0.0, rho, u).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    emit_snapshot(&state, &grid, &a).unwrap();
    let (g2, s2) = load_snapshot(&a).unwrap();
    assert_eq!(g2.n_cells(), 24);
    assert_eq!(s2.rho, state.rho);
    assert_eq!(s2.u, state.u);
    emit_snapshot(&s2, &g2, &b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn corrupted_snapshot_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let grid = make_grid(1.0, 8).unwrap();
    let path = dir.path().join("s.csv");
    emit_snapshot(&State::vacuum(8), &grid, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap().replacen("0.0000000000000000e0", "oops", 1);
    fs::write(&path, text).unwrap();
    let msg = load_snapshot(&path).unwrap_err().to_string();
    assert!(msg.contains("row"), "{msg}");
}

#[test]
fn timeseries_columns_match_the_record_fields() {
    let header = timeseries_header();
    let cols: Vec<&str> = header.split(',').collect();
    assert_eq!(cols, DiagRecord::FIELDS);
}

#[test]
fn simulated_timeseries_reloads_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let params = Params {
        n_cells: 64,
        t_end: 0.05,
        ..Params::default()
    };
    let profile = InitialProfile {
        velocity: VelocityKind::SineInSupport,
        velocity_amplitude: -0.5,
        ..InitialProfile::default()
    };
    let mut sink = MemorySink::default();
    let out = run(&params, &profile, &mut sink).unwrap();
    let path = dir.path().join("ts.csv");
    emit_timeseries(&out.records, &path).unwrap();
    assert_eq!(load_timeseries(&path).unwrap(), out.records);

    let single = dir.path().join("one.csv");
    emit_timeseries(&out.records[..1], &single).unwrap();
    assert_eq!(fs::read_to_string(&single).unwrap().lines().count(), 2);
}

#[test]
fn config_file_with_tables() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("rho.csv"), "x,rho\n-1,0\n0,1\n1,0\n").unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "# table driven\nprofile = custom_table\ndensity_table = rho.csv\nN = 64\nL = 2\nt_end = 0.01\noutputs = out\n",
    )
    .unwrap();
    let Config::Run(cfg) = parse_config(&dir.path().join("run.cfg")).unwrap() else {
        panic!("expected a single run");
    };
    assert_eq!(cfg.params.n_cells, 64);
    assert_eq!(cfg.outputs, dir.path().join("out"));
    match &cfg.profile.kind {
        DensityKind::Table(t) => assert_eq!(t.eval(0.5), 0.5),
        k => panic!("unexpected profile {k:?}"),
    }
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "N = 64\n\nalpha = 2.5\n").unwrap();
    let msg = parse_config(&path).unwrap_err().to_string();
    assert!(msg.contains(":3") || msg.contains("line 3"), "{msg}");
    assert!(msg.contains("alpha"), "{msg}");
}
