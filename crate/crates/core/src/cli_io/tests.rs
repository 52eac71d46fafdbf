use std::fs;
use super::*;
use crate::{BackgroundKind, BoundaryData, FlowTrajectory, InitialPreset, Mesh64, SolveConfig, YamabeError};

fn args(s: &str) -> Vec<String> {
    std::iter::once("yamabe".to_string())
        .chain(s.split_whitespace().map(str::to_string))
        .collect()
}

#[test]
fn run_flags_parse() {
    let cfg = parse_config(args("run --dimension 3 --preset constant:1.0 --t-final 0.5")).unwrap();
    assert_eq!(cfg.command, CommandKind::Run);
    assert_eq!(cfg.dimension, 3);
    assert_eq!(cfg.preset, InitialPreset::Constant { c: 1.0 });
    assert_eq!(cfg.t_final, 0.5);
    assert_eq!(cfg.ell, 6.0);
    assert_eq!(cfg.nodes, 400);
    assert_eq!(cfg.dt, 1e-3);
}

#[test]
fn incompleteness_flags_give_flat_annulus() {
    let cfg = parse_config(args("incompleteness --preset powerlaw:1.0 --r-min 1 --ell 100")).unwrap();
    assert_eq!(cfg.background(), BackgroundKind::Euclidean);
    assert_eq!(cfg.inner_radius(), 1.0);
    assert_eq!(cfg.ell, 100.0);
}

#[test]
fn dimension_two_rejected() {
    let err = parse_config(args("run --dimension 2")).unwrap_err();
    assert!(err.to_string().contains("dimension"), "{err}");
}

#[test]
fn too_few_nodes_rejected() {
    let err = parse_config(args("run --nodes 8")).unwrap_err();
    assert!(err.to_string().contains("nodes"), "{err}");
}

#[test]
fn bad_values_name_their_key() {
    for (flag, key) in [
        ("--dt abc", "dt"),
        ("--dt -1", "dt"),
        ("--preset bump:1,2", "preset"),
        ("--preset wobble:1", "preset"),
        ("--gradient sideways", "gradient"),
        ("--ladder 3,x", "ladder"),
    ] {
        let err = parse_config(args(&format!("run {flag}"))).unwrap_err();
        assert!(err.to_string().contains(key), "{flag}: {err}");
    }
}

#[test]
fn compare_needs_lower_preset() {
    let err = parse_config(args("compare --preset constant:1")).unwrap_err();
    assert!(err.to_string().contains("lower_preset"));
}

#[test]
fn file_keys_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "# bump run\npreset = bump:1,1,2,0.5\nell = 4\nt-final = 0.1  # short\nnodes = 100\n").unwrap();
    let cfg = parse_config(args(&format!("run --config {} --nodes 50", path.display()))).unwrap();
    assert_eq!(cfg.ell, 4.0);
    assert_eq!(cfg.t_final, 0.1);
    assert_eq!(cfg.nodes, 50);
    assert!(matches!(cfg.preset, InitialPreset::Bump { .. }));

    fs::write(&path, "ell = 4\nmesh_size = 3\n").unwrap();
    let err = parse_config(args(&format!("run --config {}", path.display()))).unwrap_err();
    assert!(matches!(err, YamabeError::Config(_)));
    assert!(err.to_string().contains("mesh_size"), "{err}");

    fs::write(&path, "ell 4\n").unwrap();
    assert!(parse_config(args(&format!("run --config {}", path.display()))).is_err());
}

#[test]
fn missing_output_directory_rejected() {
    let err = parse_config(args("run --output /nonexistent-dir/x.csv")).unwrap_err();
    assert!(err.to_string().contains("output"));
}

#[test]
fn preset_specs_round_trip() {
    for spec in ["constant:1.5", "flatstatic:4", "bump:1,1,2,0.5", "puncturedsphere", "powerlaw:1"] {
        let p = parse_preset(spec).unwrap();
        assert_eq!(parse_preset(&preset_spec(&p)).unwrap(), p);
    }
    assert!(parse_preset("constant:-1").is_err());
    assert!(parse_preset("puncturedsphere:2").is_err());
}

fn constant_run(dir: &std::path::Path, name: &str) -> RunConfig {
    let mut cfg = parse_config(args("run --preset constant:1.0 --ell 3 --nodes 30 --dt 0.01 --t-final 0.05")).unwrap();
    cfg.output = Some(dir.join(name));
    cfg
}

#[test]
fn constant_export_first_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = execute(&constant_run(dir.path(), "c.csv")).unwrap();
    assert!(out.report.pass);
    assert_eq!(out.written.len(), 2);
    let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,r,u,U,R_elliptic"));
    assert_eq!(lines.next(), Some("0,0,1,1,-6"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["bounds"]["c0"], 1.0);
    assert_eq!(json["diagnostics"]["kind"], "run");
}

#[test]
fn flat_static_first_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(args("run --preset flatstatic:4 --ell 3 --nodes 30 --dt 0.01 --t-final 0.02")).unwrap();
    cfg.output = Some(dir.path().join("f.csv"));
    execute(&cfg).unwrap();
    let rows = import_trajectory(&dir.path().join("f.csv")).unwrap();
    assert_eq!((rows[0].t, rows[0].r, rows[0].u), (0.0, 0.0, 1.0));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = constant_run(dir.path(), "a.csv");
    a.preset = InitialPreset::Bump {
        base: 1.0,
        amplitude: 1.0,
        center: 1.0,
        width: 0.5,
    };
    let mut b = a.clone();
    b.output = Some(dir.path().join("b.csv"));
    execute(&a).unwrap();
    execute(&b).unwrap();
    let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    let ja = String::from_utf8(read("a.json")).unwrap().replace("a.csv", "");
    let jb = String::from_utf8(read("b.json")).unwrap().replace("b.csv", "");
    assert_eq!(ja, jb);
}

#[test]
fn export_round_trips_to_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = constant_run(dir.path(), "r.csv");
    cfg.preset = parse_preset("bump:1,1,1,0.5").unwrap();
    let out = execute(&cfg).unwrap();
    let traj = out.trajectory.unwrap();
    let rows = import_trajectory(&dir.path().join("r.csv")).unwrap();
    let n = traj.mesh.len();
    assert_eq!(rows.len(), n * traj.len());
    let rg = traj.elliptic_curvatures().unwrap();
    for (k, s) in traj.states.iter().enumerate() {
        for i in 0..n {
            let row = rows[k * n + i];
            assert_eq!(row.t, s.t);
            assert_eq!(row.r, traj.mesh.nodes()[i]);
            assert_eq!(row.u, s.u[i]);
            assert_eq!(row.big_u, s.u[i].powf(0.25));
            assert_eq!(row.r_elliptic, rg[k][i]);
        }
    }
}

#[test]
fn empty_trajectory_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = Mesh64::new(BackgroundKind::Hyperbolic, 3, 0.0, 1.0, 16).unwrap();
    let traj = FlowTrajectory {
        mesh,
        boundary: BoundaryData::Frozen { value: 1.0 },
        config: SolveConfig::new(0.1, 1.0),
        states: Vec::new(),
        steps: Vec::new(),
    };
    let path = dir.path().join("e.csv");
    export_trajectory(&traj, &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "t,r,u,U,R_elliptic\n");
    assert!(import_trajectory(&path).unwrap().is_empty());
}

#[test]
fn io_errors_carry_path() {
    let err = import_trajectory(std::path::Path::new("/nonexistent/file.csv")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/file.csv"), "{err}");
}

#[test]
fn barriers_and_compare_commands_pass() {
    let cfg = parse_config(args("barriers --preset bump:1,1,2,0.5 --ell 4 --nodes 100 --dt 0.005 --t-final 0.3")).unwrap();
    assert!(execute(&cfg).unwrap().report.pass);
    let cfg = parse_config(args("compare --preset constant:1 --lower-preset constant:0.8 --ell 3 --nodes 60 --dt 0.01 --t-final 0.1")).unwrap();
    assert!(execute(&cfg).unwrap().report.pass);
    let cfg = parse_config(args("compare --preset constant:1 --lower-preset powerlaw:1")).unwrap();
    assert!(execute(&cfg).is_err());
}

#[test]
fn exhaust_command_writes_inner_ball() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(args("exhaust --preset bump:1,1,2,0.5 --ladder 3,4,5 --nodes 100 --dt 0.005 --t-final 0.2")).unwrap();
    cfg.output = Some(dir.path().join("x.json"));
    let out = execute(&cfg).unwrap();
    assert!(out.report.pass);
    let rows = import_trajectory(&dir.path().join("x.csv")).unwrap();
    assert!(rows.iter().all(|r| r.r <= 3.0 + 1e-12));
}
