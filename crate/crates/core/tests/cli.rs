use std::fs;
use std::path::Path;

use wellscape::cli::{main_with_args, Manifest};

fn run(cmd: &str, config: &str, dir: &Path, extra: &[&str]) -> i32 {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec!["wellscape", cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    main_with_args(args)
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_str(&fs::read_to_string(dir.join("out/manifest.json")).unwrap()).unwrap()
}

#[test]
fn construct_branched_writes_field_and_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "command": "construct-branched",
                  "grid": {"L": 1.0, "nx": 512, "ny": 512},
                  "params": {"epsilon": 0.01, "delta": 0.1, "variant": 3}}"#;
    assert_eq!(run("construct-branched", cfg, dir.path(), &[]), 0);
    let m = manifest(dir.path());
    assert_eq!(m.artifacts, vec!["spec.json", "field.wsf", "breakdown.json", "manifest.json"]);
    assert_eq!(m.config_sha256.len(), 64);
    let field = wellscape::wsf::read(fs::File::open(dir.path().join("out/field.wsf")).unwrap()).unwrap();
    assert_eq!((field.grid.nx, field.grid.ny), (512, 512));
    let b: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/breakdown.json")).unwrap()).unwrap();
    for k in ["surface", "elastic", "well", "total", "area_B", "area_A"] {
        assert!(b[k].is_number(), "{k}");
    }
    // no temp files left behind
    let names: Vec<String> =
        fs::read_dir(dir.path().join("out")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert!(names.iter().all(|n| !n.ends_with(".tmp")));
    assert_eq!(names.len(), m.artifacts.len());
}

#[test]
fn outputs_are_reproducible() {
    let cfg = r#"{"schema": 1, "grid": {"L": 1.0, "nx": 32, "ny": 32},
                  "params": {"epsilon": 0.05, "delta": 0.5},
                  "probe": {"n_samples": 20, "norm_cap": 1e-3, "area_cap": 0.01}}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run("probe-local-min", cfg, a.path(), &["--seed", "7"]), 0);
    assert_eq!(run("probe-local-min", cfg, b.path(), &["--seed", "7"]), 0);
    for f in ["probe.json", "manifest.json"] {
        assert_eq!(fs::read(a.path().join("out").join(f)).unwrap(), fs::read(b.path().join("out").join(f)).unwrap());
    }
    assert_eq!(manifest(a.path()).seed, 7);
}

#[test]
fn verify_inequalities_all_hold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "grid": {"L": 1.0, "nx": 128, "ny": 256},
                  "params": {"epsilon": 0.01, "delta": 0.1},
                  "construction": {"a": 0.05, "delta_x": 0.25, "lambda": 4.0, "j": 4}}"#;
    assert_eq!(run("verify-inequalities", cfg, dir.path(), &[]), 0);
    let csv = fs::read_to_string(dir.path().join("out/reports.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("check,context,lhs,rhs,slack,holds"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 9);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn obstacle_and_minimize() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "obstacle": {"intervals": [[0.0, 1.0], [0.0, 0.5]], "nodes": 128}}"#;
    assert_eq!(run("obstacle-1d", cfg, dir.path(), &[]), 0);
    let csv = fs::read_to_string(dir.path().join("out/obstacle.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "grid": {"L": 1.0, "nx": 32, "ny": 32},
                  "params": {"epsilon": 0.05, "delta": 0.5, "variant": 2},
                  "start": {"kind": "random", "amplitude": 1.5},
                  "minimize": {"max_iters": 20}}"#;
    assert_eq!(run("minimize", cfg, dir.path(), &[]), 0);
    let trace = fs::read_to_string(dir.path().join("out/trace.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert!(first["smoothed_energy"].is_number() && first["grad_norm"].is_number());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("energy", "{not json", dir.path(), &[]), 2);
    assert_eq!(run("energy", r#"{"schema": 9}"#, dir.path(), &[]), 2);
    assert_eq!(run("energy", r#"{"schema": 1, "command": "minimize"}"#, dir.path(), &[]), 2);
    assert_eq!(run("energy", r#"{"schema": 1, "input_field": "missing.wsf"}"#, dir.path(), &[]), 2);
    let cfg = r#"{"schema": 1, "grid": {"L": 1.0, "nx": 32, "ny": 32},
                  "params": {"epsilon": 0.01}, "sweep": {"epsilons": [0.01, 0.02]}}"#;
    assert_eq!(run("sweep-delta", cfg, dir.path(), &[]), 2);
}

#[test]
fn energy_of_a_written_field() {
    let dir = tempfile::tempdir().unwrap();
    let g = wellscape::Grid::new(1.0, 16, 16).unwrap();
    let u = wellscape::ScalarField::from_fn(g, |x, y| x * (6.0 * y).sin());
    fs::write(dir.path().join("u.wsf"), wellscape::wsf::to_string(&u)).unwrap();
    let cfg = r#"{"schema": 1, "input_field": "u.wsf", "params": {"epsilon": 0.1, "delta": 0.2}}"#;
    assert_eq!(run("energy", cfg, dir.path(), &[]), 0);
    assert!(dir.path().join("out/b_geometry.json").exists());
}
