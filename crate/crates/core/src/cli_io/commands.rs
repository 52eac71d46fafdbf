use super::config::{CommandKind, RunConfig};
use super::export::{export_trajectory, write_report};
use crate::boundary_data::{BoundaryData, BoundaryProfile};
use crate::diagnostics::{
    check_barriers_with, compare_flows, completeness_scan, BarrierOptions, BarrierReport, ComparisonReport,
    CompletenessReport, JWindow, ScanConfig, VerdictTrend,
};
use crate::error::{Result, YamabeError};
use crate::exhaustion::{run_exhaustion, ConvergenceReport, ExhaustionPlan};
use crate::geometry::{BackgroundKind, RadialMesh};
use crate::initial_data::{data_bounds, initial_scalar_curvature, make_initial, DataBounds, InitialPreset};
use crate::solver::{evo_r_residual, solve, FlowTrajectory, SolveConfig};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    Run {
        steps: usize,
        max_halvings: usize,
        m_matrix_violations: usize,
        min_u: f64,
        max_curvature_discrepancy: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        evo_r_max: Option<f64>,
    },
    Barriers {
        report: BarrierReport,
    },
    Compare {
        report: ComparisonReport,
    },
    Exhaust {
        report: ConvergenceReport,
    },
    Incompleteness {
        report: CompletenessReport,
        expected: VerdictTrend,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<DataBounds<f64>>,
    pub diagnostics: Diagnostics,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    /// Trajectory written as CSV when an output path is set.
    pub trajectory: Option<FlowTrajectory<f64>>,
    /// Files written, CSV first.
    pub written: Vec<PathBuf>,
}

fn mesh_for(cfg: &RunConfig) -> Result<RadialMesh<f64>> {
    RadialMesh::new(cfg.background(), cfg.dimension, cfg.inner_radius(), cfg.ell, cfg.nodes)
}

fn solve_config(cfg: &RunConfig) -> SolveConfig<f64> {
    SolveConfig::new(cfg.dt.min(cfg.t_final), cfg.t_final)
        .with_theta(cfg.theta)
        .with_gradient(cfg.gradient)
}

/// The static flat metric and flat-space data keep their rim value; other
/// hyperbolic data get the ramped boundary curve.
fn solve_preset(
    cfg: &RunConfig,
    preset: &InitialPreset<f64>,
    mesh: &RadialMesh<f64>,
) -> Result<(FlowTrajectory<f64>, DataBounds<f64>)> {
    let u0 = make_initial(preset, mesh)?;
    let r0 = initial_scalar_curvature(&u0, mesh)?;
    let bounds = data_bounds(&u0, &r0, cfg.dimension)?;
    let rim = u0[mesh.len() - 1];
    let boundary = match (mesh.background(), preset) {
        (BackgroundKind::Euclidean, _) | (_, InitialPreset::FlatStatic { .. }) => BoundaryData::Frozen { value: rim },
        _ => BoundaryData::profile(BoundaryProfile::from_initial(&u0, &r0, &bounds, cfg.dimension)?),
    };
    let traj = solve(&u0, mesh, boundary, &solve_config(cfg))?;
    Ok((traj, bounds))
}

/// `1/k` with about `nodes` intervals on the largest ball, so integer
/// radii fall on nodes.
fn ladder_spacing(cfg: &RunConfig, top: f64) -> f64 {
    cfg.dr.unwrap_or_else(|| 1.0 / (cfg.nodes as f64 / top).ceil())
}

/// Runs the configured command and writes its outputs.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let (bounds, diagnostics, pass, trajectory) = match cfg.command {
        CommandKind::Run => {
            let mesh = mesh_for(cfg)?;
            let (traj, bounds) = solve_preset(cfg, &cfg.preset, &mesh)?;
            let evo = if traj.len() >= 3 {
                Some(evo_r_residual(&traj)?.max())
            } else {
                None
            };
            let d = Diagnostics::Run {
                steps: traj.steps.len(),
                max_halvings: traj.steps.iter().map(|s| s.halvings).max().unwrap_or(0),
                m_matrix_violations: traj.steps.iter().map(|s| s.m_matrix_violations).sum(),
                min_u: traj.steps.iter().map(|s| s.min_u).fold(traj.first().u.min(), f64::min),
                max_curvature_discrepancy: traj
                    .steps
                    .iter()
                    .map(|s| s.curvature_discrepancy)
                    .fold(0.0, f64::max),
                evo_r_max: evo,
            };
            (Some(bounds.to_f64()), d, true, Some(traj))
        }
        CommandKind::Barriers => {
            let mesh = mesh_for(cfg)?;
            let (traj, bounds) = solve_preset(cfg, &cfg.preset, &mesh)?;
            let opts = BarrierOptions {
                tolerance: cfg.tolerance,
                b_flat: cfg.b_flat,
                eps: None,
            };
            let report = check_barriers_with(&traj, &bounds, &opts)?;
            let pass = report.pass;
            (Some(bounds.to_f64()), Diagnostics::Barriers { report }, pass, Some(traj))
        }
        CommandKind::Compare => {
            let lower = cfg
                .lower_preset
                .as_ref()
                .ok_or_else(|| YamabeError::Config("`lower_preset`: required by compare".into()))?;
            if lower.required_background().unwrap_or(BackgroundKind::Hyperbolic) != cfg.background() {
                return Err(YamabeError::Config(
                    "`lower_preset`: must live on the same background as `preset`".into(),
                ));
            }
            let mesh = mesh_for(cfg)?;
            let (above, bounds) = solve_preset(cfg, &cfg.preset, &mesh)?;
            let (below, _) = solve_preset(cfg, lower, &mesh)?;
            let report = compare_flows(&above, &below, &JWindow::default())?;
            let pass = report.pass;
            (Some(bounds.to_f64()), Diagnostics::Compare { report }, pass, None)
        }
        CommandKind::Exhaust => {
            let top = cfg.ladder.last().copied().unwrap_or(cfg.ell);
            let mut plan = ExhaustionPlan::new(cfg.ladder.clone(), cfg.dimension, ladder_spacing(cfg, top), cfg.dt, cfg.t_final);
            plan.theta = cfg.theta;
            plan.gradient = cfg.gradient;
            let result = run_exhaustion(&cfg.preset, &plan)?;
            let pass = result.report.d_strictly_decreasing;
            let bounds = result.report.levels.last().map(|l| l.bounds);
            (
                bounds,
                Diagnostics::Exhaust { report: result.report },
                pass,
                Some(result.global),
            )
        }
        CommandKind::Incompleteness => {
            let bg = cfg.background();
            let domains = if cfg.domains.is_empty() {
                match bg {
                    BackgroundKind::Hyperbolic => vec![4.0, 6.0, 8.0],
                    BackgroundKind::Euclidean => vec![cfg.ell / 2.0, cfg.ell],
                }
            } else {
                cfg.domains.clone()
            };
            let samples = if cfg.t_samples.is_empty() {
                (1..=4).map(|j| cfg.t_final * j as f64 / 4.0).collect()
            } else {
                cfg.t_samples.clone()
            };
            let mut scan = ScanConfig::new(cfg.dimension, cfg.dr.unwrap_or(0.05), cfg.dt);
            if let Some(r) = cfg.r_min {
                scan.r_min = r;
                scan.base_radius = r.max(scan.base_radius);
            }
            let report = completeness_scan(&cfg.preset, &domains, &samples, &scan)?;
            let expected = match bg {
                BackgroundKind::Hyperbolic => VerdictTrend::DivergingWithDomain,
                BackgroundKind::Euclidean => VerdictTrend::UniformlyBounded,
            };
            let pass = report.verdict_trend == expected;
            (None, Diagnostics::Incompleteness { report, expected }, pass, None)
        }
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        bounds,
        diagnostics,
        pass,
    };
    let mut written = Vec::new();
    if let Some(out) = &cfg.output {
        if let Some(traj) = &trajectory {
            let csv_path = if out.extension().is_some_and(|e| e == "json") {
                out.with_extension("csv")
            } else {
                out.clone()
            };
            export_trajectory(traj, &csv_path)?;
            written.push(csv_path);
        }
        let sidecar = out.with_extension("json");
        write_report(&report, &sidecar)?;
        written.push(sidecar);
    }
    Ok(Outcome {
        report,
        trajectory,
        written,
    })
}
