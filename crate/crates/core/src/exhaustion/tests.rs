use super::*;

fn bump() -> InitialPreset<f64> {
    InitialPreset::Bump {
        base: 1.0,
        amplitude: 1.0,
        center: 2.0,
        width: 0.5,
    }
}

#[test]
fn constant_levels_agree() {
    let plan = ExhaustionPlan::new(vec![2.0, 3.0, 4.0], 3, 0.05, 0.01, 0.2);
    let res = run_exhaustion(&InitialPreset::Constant { c: 1.0 }, &plan).unwrap();
    assert_eq!(res.report.d.len(), 2);
    for d in &res.report.d {
        assert!(*d < 1e-10, "d = {d}");
    }
    assert!((res.report.horizon - 0.2).abs() < 1e-12);
    assert_eq!(res.global.mesh.r_max(), 2.0);
}

#[test]
fn bump_ladder_converges() {
    let plan = ExhaustionPlan::new(vec![3.0, 4.0, 5.0, 6.0], 3, 0.02, 2e-3, 0.5);
    let res = run_exhaustion(&bump(), &plan).unwrap();
    let r = &res.report;
    eprintln!("{:?} grad var {}", r.d, r.gradient_variation);
    assert!(r.d_strictly_decreasing, "{:?}", r.d);
    assert!(r.d[2] < r.d[0] / 2.0);
    assert!(r.gradient_variation < 0.1);
    for l in &r.levels {
        assert!(l.sandwich_worst >= -1e-8, "{}", l.sandwich_worst);
    }
}

#[test]
fn plan_validation() {
    let mut plan = ExhaustionPlan::new(vec![2.0, 3.0], 3, 0.05, 0.01, 0.2);
    assert!(plan.validate().is_err());
    plan.ladder = vec![2.0, 4.0, 3.0];
    assert!(plan.validate().is_err());
    plan.ladder = vec![2.0, 3.0, 4.0];
    plan.inner_radius = Some(2.5);
    assert!(plan.validate().is_err());
    plan.inner_radius = Some(1.0);
    assert!(plan.validate().is_ok());
}

#[test]
fn euclidean_preset_rejected() {
    let plan = ExhaustionPlan::new(vec![2.0, 3.0, 4.0], 3, 0.05, 0.01, 0.2);
    assert!(matches!(
        run_exhaustion(&InitialPreset::PowerLaw { b: 1.0 }, &plan),
        Err(YamabeError::PresetMismatch { .. })
    ));
}

fn constant_flow(t_final: f64) -> FlowTrajectory<f64> {
    let mesh = RadialMesh::new(BackgroundKind::Hyperbolic, 3, 0.0, 3.0, 60).unwrap();
    let u0 = make_initial(&InitialPreset::Constant { c: 1.0 }, &mesh).unwrap();
    let r = initial_scalar_curvature(&u0, &mesh).unwrap();
    let b = data_bounds(&u0, &r, 3).unwrap();
    let p = BoundaryProfile::from_initial(&u0, &r, &b, 3).unwrap();
    crate::solver::solve(&u0, &mesh, BoundaryData::profile(p), &SolveConfig::new(0.01, t_final)).unwrap()
}

#[test]
fn constant_extension_is_exact() {
    let flow = constant_flow(0.5);
    let ext = extend_time(&flow, 0.05, 0.5).unwrap();
    assert_eq!(ext.k1, 0.0);
    assert!((ext.restart_time - 0.45).abs() < 1e-9);
    assert!((ext.flow.last().t - 0.95).abs() < 1e-9);
    assert!(ext.overlap_samples >= 4);
    assert!(ext.overlap_sup < 1e-10);
    for s in &ext.flow.states {
        for &u in s.u.iter() {
            assert!((u - (1.0 + 6.0 * s.t)).abs() < 1e-10);
        }
    }
    assert!(ext.flow.times().windows(2).all(|w| w[1] > w[0]));
    assert_eq!(ext.flow.steps.len() + 1, ext.flow.len());
}

#[test]
fn extension_rejects_large_epsilon() {
    let flow = constant_flow(0.5);
    assert!(extend_time(&flow, 0.1, 0.5).is_err());
    assert!(extend_time(&flow, 0.0, 0.5).is_err());
}

#[test]
fn bump_extension_overlaps_and_stays_above_big_bang() {
    let mesh = RadialMesh::new(BackgroundKind::Hyperbolic, 3, 0.0, 5.0, 200).unwrap();
    let u0 = make_initial(&bump(), &mesh).unwrap();
    let r = initial_scalar_curvature(&u0, &mesh).unwrap();
    let b = data_bounds(&u0, &r, 3).unwrap();
    let p = BoundaryProfile::from_initial(&u0, &r, &b, 3).unwrap();
    let t1 = 0.9 / b.k0.max(1.0);
    let flow = crate::solver::solve(&u0, &mesh, BoundaryData::profile(p), &SolveConfig::new(2e-3, t1)).unwrap();
    let ext = extend_time(&flow, t1 / 10.0, 0.5).unwrap();
    assert!(ext.overlap_samples > 0);
    assert!(ext.overlap_sup < 0.05, "overlap {}", ext.overlap_sup);
    for s in &ext.flow.states {
        for &u in s.u.iter() {
            assert!(u >= 6.0 * s.t + b.u0_min / 3.0 - 1e-8);
        }
    }
}

#[test]
fn extend_until_reaches_target() {
    let flow = constant_flow(0.3);
    let exts = extend_until(flow, 1.0, 0.3, 10).unwrap();
    let last = &exts.last().unwrap().flow;
    assert!(last.last().t >= 1.0 - 1e-9);
    assert!((last.last().u[0] - (1.0 + 6.0 * last.last().t)).abs() < 1e-9);
}
