//! Files on disk: configuration, CSV outputs and their sidecars.

use nlfp_core::fp_solver::simulate_spec;
use nlfp_core::io::{
    meta_path, parse_config, parse_limit_csv, read_trajectory_csv, trajectory_csv, write_limit_csv,
    write_trajectory_csv, write_with_meta, RunMeta,
};
use nlfp_core::limit_model::{integrate_limit, LimitOptions};

const SHORT_RUN: &str = r#"
[regime]
nu = 0.4

[grid]
N = 256

[control]
kind = "ramp"
from = -1.0
to = 1.0

[time]
T = 0.5
stride = 10
"#;

#[test]
fn simulation_csv_survives_the_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(SHORT_RUN).unwrap();
    let sim = simulate_spec(&cfg.simulation_spec().unwrap()).unwrap();
    let path = dir.path().join("run.csv");
    write_trajectory_csv(&sim.record, &path).unwrap();
    let back = read_trajectory_csv(&path).unwrap();
    assert_eq!(back.rows.len(), sim.record.rows.len());
    for (a, b) in sim.record.rows.iter().zip(&back.rows) {
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
        }
    }
}

#[test]
fn equal_configs_give_identical_files() {
    let a = parse_config(SHORT_RUN).unwrap();
    // same content, different layout
    let b = parse_config(&SHORT_RUN.replace("nu = 0.4", "nu = 0.40  # noise")).unwrap();
    assert_eq!(a.hash(), b.hash());
    let run = |c: &nlfp_core::io::RunConfig| {
        trajectory_csv(&simulate_spec(&c.simulation_spec().unwrap()).unwrap().record).unwrap()
    };
    assert_eq!(run(&a), run(&b));
}

#[test]
fn sidecar_carries_hash_and_canonical_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(SHORT_RUN).unwrap();
    let path = dir.path().join("out.csv");
    write_with_meta(&path, "a\n1\n", &RunMeta::new("simulate", &cfg).with("dt_used", 0.5)).unwrap();
    let meta = std::fs::read_to_string(meta_path(&path)).unwrap();
    assert!(meta.contains(&cfg.hash()));
    assert!(meta.contains("dt_used = \"0.5\""));
    // the canonical config inside the sidecar parses back to the same run
    let tail = meta.split_once("# canonical configuration").unwrap().1;
    let tail = tail.split_once('\n').unwrap().1;
    assert_eq!(parse_config(tail).unwrap().hash(), cfg.hash());
}

#[test]
fn limit_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(SHORT_RUN).unwrap();
    let traj = integrate_limit(
        &cfg.potential,
        &cfg.regime,
        &cfg.control,
        0.0,
        -1.0,
        0.5,
        &LimitOptions::uniform(0.5, 50),
    )
    .unwrap();
    let path = dir.path().join("limit.csv");
    write_limit_csv(&traj, &path).unwrap();
    let nodes = parse_limit_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(nodes, traj.nodes);
}

#[test]
fn unreadable_config_reports_every_problem() {
    let err = parse_config("[regime]\nnu = -1\nbogus = 2\n").unwrap_err().to_string();
    assert!(err.contains("bogus"), "{err}");
    assert!(err.contains("time.T") || err.contains("T"), "{err}");
}
