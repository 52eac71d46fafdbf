//! Solves on a ladder of nested balls, compares them on the innermost one,
//! and continues flows past their first horizon by restarting.

use crate::boundary_data::{BoundaryData, BoundaryProfile};
use crate::diagnostics::gradient_quantity_sup;
use crate::error::{Result, YamabeError};
use crate::geometry::{BackgroundKind, RadialMesh};
use crate::initial_data::{data_bounds, initial_scalar_curvature, make_initial, DataBounds, InitialPreset};
use crate::scalar::Real;
use crate::solver::{curvature_pair, FlowSolver, FlowTrajectory, GradientTreatment, SolveConfig};
use serde::{Deserialize, Serialize};
use std::thread;

/// Fraction of `1/K` used as a leg horizon.
pub const HORIZON_FACTOR: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustionPlan<T> {
    /// Radii `ℓ_1 < ℓ_2 < ...`, at least three.
    pub ladder: Vec<T>,
    /// Radius of the comparison ball; `ℓ_1` when unset.
    pub inner_radius: Option<T>,
    pub dim: usize,
    /// Mesh spacing shared by every level, so the levels share nodes.
    pub dr: T,
    pub dt: T,
    pub t_final: T,
    pub theta: T,
    pub gradient: GradientTreatment,
    pub horizon_factor: T,
    pub checkpoints: usize,
    /// The gradient quantity is taken over `B_{ℓ - margin}`.
    pub gradient_margin: T,
}

impl<T: Real> ExhaustionPlan<T> {
    pub fn new(ladder: Vec<T>, dim: usize, dr: T, dt: T, t_final: T) -> Self {
        Self {
            ladder,
            inner_radius: None,
            dim,
            dr,
            dt,
            t_final,
            theta: T::one(),
            gradient: GradientTreatment::ImplicitLinearized,
            horizon_factor: T::lit(HORIZON_FACTOR),
            checkpoints: 10,
            gradient_margin: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ladder.len() < 3 {
            return Err(YamabeError::InvalidParameter(format!(
                "exhaustion needs at least 3 ladder levels, got {}",
                self.ladder.len()
            )));
        }
        if self.ladder.windows(2).any(|w| !(w[1] > w[0])) || !(self.ladder[0] > T::zero()) {
            return Err(YamabeError::InvalidParameter(
                "ladder radii must be positive and strictly increasing".into(),
            ));
        }
        let inner = self.inner();
        if !(inner > T::zero()) || inner > self.ladder[0] {
            return Err(YamabeError::InvalidParameter(format!(
                "inner radius {inner} must lie in (0, {}]",
                self.ladder[0]
            )));
        }
        if !(self.horizon_factor > T::zero() && self.horizon_factor < T::one()) {
            return Err(YamabeError::InvalidParameter(format!(
                "horizon factor must lie in (0, 1), got {}",
                self.horizon_factor
            )));
        }
        if self.checkpoints == 0 {
            return Err(YamabeError::InvalidParameter("need at least one checkpoint".into()));
        }
        Ok(())
    }

    pub fn inner(&self) -> T {
        self.inner_radius.unwrap_or(self.ladder[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub radius: f64,
    pub nodes: usize,
    pub bounds: DataBounds<f64>,
    /// Sup of `U^{-1/2}|∇U|²` over `B_{ℓ - margin}` and all stored times.
    pub gradient_sup: f64,
    /// Worst slack of `m(m-1)t + min u0/3 <= u <= m(m-1)t + 5 max u0/3`.
    pub sandwich_worst: f64,
    pub max_halvings: usize,
    pub m_matrix_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub ladder: Vec<f64>,
    pub inner_radius: f64,
    pub horizon: f64,
    pub checkpoints: Vec<f64>,
    /// `d_k = sup |u_{ℓ_k} - u_{ℓ_{k+1}}|` over the inner ball and checkpoints.
    pub d: Vec<f64>,
    pub d_strictly_decreasing: bool,
    pub levels: Vec<LevelSummary>,
    /// `(max - min) / max` of the per-level gradient sups.
    pub gradient_variation: f64,
}

#[derive(Debug, Clone)]
pub struct ExhaustionResult<T> {
    /// Finest level restricted to the inner ball.
    pub global: FlowTrajectory<T>,
    pub levels: Vec<FlowTrajectory<T>>,
    pub report: ConvergenceReport,
}

struct LevelSetup<T> {
    mesh: RadialMesh<T>,
    bounds: DataBounds<T>,
    boundary: BoundaryData<T>,
    u0: crate::geometry::RadialField<T>,
}

fn setup_level<T: Real>(preset: &InitialPreset<T>, plan: &ExhaustionPlan<T>, radius: T) -> Result<LevelSetup<T>> {
    let mesh = RadialMesh::with_spacing(BackgroundKind::Hyperbolic, plan.dim, T::zero(), radius, plan.dr)?;
    let u0 = make_initial(preset, &mesh)?;
    let r = initial_scalar_curvature(&u0, &mesh)?;
    let bounds = data_bounds(&u0, &r, plan.dim)?;
    let profile = BoundaryProfile::from_initial(&u0, &r, &bounds, plan.dim)?;
    Ok(LevelSetup {
        mesh,
        bounds,
        boundary: BoundaryData::profile(profile),
        u0,
    })
}

fn sandwich_worst<T: Real>(traj: &FlowTrajectory<T>, bounds: &DataBounds<T>) -> f64 {
    let mm1 = T::from_count(traj.mesh.dim() * (traj.mesh.dim() - 1));
    let third = T::one() / T::lit(3.0);
    let mut worst = f64::INFINITY;
    for s in &traj.states {
        let bang = mm1 * s.t;
        for &u in s.u.iter() {
            let lo = u - (bang + bounds.u0_min * third);
            let hi = bang + T::lit(5.0) * third * bounds.c0 - u;
            worst = worst.min(lo.min(hi).as_f64());
        }
    }
    worst
}

/// Solves `preset` on every ladder ball up to a common horizon
/// `min(t_final, factor/K0)`, each level with boundary data built from its
/// own closed ball, and measures how consecutive levels differ on the inner
/// ball. Levels are solved concurrently.
pub fn run_exhaustion<T: Real>(preset: &InitialPreset<T>, plan: &ExhaustionPlan<T>) -> Result<ExhaustionResult<T>> {
    plan.validate()?;
    if preset.required_background() == Some(BackgroundKind::Euclidean) {
        return Err(YamabeError::PresetMismatch {
            preset: preset.name(),
            required: BackgroundKind::Euclidean.name(),
            found: BackgroundKind::Hyperbolic.name(),
        });
    }
    let wrap = |level: usize, radius: T| {
        move |e: YamabeError| YamabeError::Level {
            level,
            radius: radius.as_f64(),
            source: Box::new(e),
        }
    };
    let setups = plan
        .ladder
        .iter()
        .enumerate()
        .map(|(k, &radius)| setup_level(preset, plan, radius).map_err(wrap(k + 1, radius)))
        .collect::<Result<Vec<_>>>()?;
    let horizon = setups
        .iter()
        .map(|s| {
            if s.bounds.k0 > T::zero() {
                plan.horizon_factor / s.bounds.k0
            } else {
                T::infinity()
            }
        })
        .fold(plan.t_final, T::min);
    let config = SolveConfig {
        dt: plan.dt.min(horizon),
        t_final: horizon,
        gradient: plan.gradient,
        theta: plan.theta,
        max_halvings: crate::solver::MAX_HALVINGS,
    };
    let levels: Vec<Result<FlowTrajectory<T>>> = thread::scope(|scope| {
        let handles: Vec<_> = setups
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let wrap = wrap(k + 1, plan.ladder[k]);
                scope.spawn(move || {
                    FlowSolver::new(s.mesh.clone(), config)
                        .and_then(|solver| solver.solve(&s.u0, s.boundary.clone()))
                        .map_err(wrap)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("exhaustion worker panicked"))
            .collect()
    });
    let levels = levels.into_iter().collect::<Result<Vec<_>>>()?;

    let inner = plan.inner();
    let last_inner = setups[0].mesh.index_of(inner).ok_or_else(|| {
        YamabeError::InvalidParameter(format!(
            "inner radius {inner} is not a multiple of the spacing {}",
            plan.dr
        ))
    })?;
    let checkpoints: Vec<T> = (1..=plan.checkpoints)
        .map(|j| horizon * T::from_count(j) / T::from_count(plan.checkpoints))
        .collect();
    let mut d = Vec::with_capacity(levels.len() - 1);
    for pair in levels.windows(2) {
        let mut sup = T::zero();
        for &t in &checkpoints {
            let a = &pair[0].states[pair[0].index_near(t)];
            let b = &pair[1].states[pair[1].index_near(t)];
            for i in 0..=last_inner {
                sup = sup.max((a.u[i] - b.u[i]).abs());
            }
        }
        d.push(sup.as_f64());
    }
    let mut summaries = Vec::with_capacity(levels.len());
    for (traj, s) in levels.iter().zip(&setups) {
        let w = gradient_quantity_sup(traj, plan.gradient_margin)?;
        summaries.push(LevelSummary {
            radius: traj.mesh.r_max().as_f64(),
            nodes: traj.mesh.len(),
            bounds: s.bounds.to_f64(),
            gradient_sup: w.iter().map(|&(_, x)| x.as_f64()).fold(0.0, f64::max),
            sandwich_worst: sandwich_worst(traj, &s.bounds),
            max_halvings: traj.steps.iter().map(|r| r.halvings).max().unwrap_or(0),
            m_matrix_violations: traj.steps.iter().map(|r| r.m_matrix_violations).sum(),
        });
    }
    let g_max = summaries.iter().map(|s| s.gradient_sup).fold(0.0, f64::max);
    let g_min = summaries.iter().map(|s| s.gradient_sup).fold(f64::INFINITY, f64::min);
    let report = ConvergenceReport {
        ladder: plan.ladder.iter().map(|r| r.as_f64()).collect(),
        inner_radius: inner.as_f64(),
        horizon: horizon.as_f64(),
        checkpoints: checkpoints.iter().map(|t| t.as_f64()).collect(),
        d_strictly_decreasing: d.windows(2).all(|w| w[1] < w[0]),
        d,
        levels: summaries,
        gradient_variation: if g_max > 0.0 { (g_max - g_min) / g_max } else { 0.0 },
    };
    let global = levels[levels.len() - 1].restricted(inner)?;
    Ok(ExhaustionResult {
        global,
        levels,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct Extension<T> {
    /// Original flow up to the restart time followed by the new leg.
    pub flow: FlowTrajectory<T>,
    pub restart_time: T,
    /// `max(0, sup R)` at the restart state.
    pub k1: T,
    pub leg_length: T,
    /// Sup difference between the old and new legs on their common times.
    pub overlap_sup: T,
    pub overlap_samples: usize,
}

/// Restarts `flow` from its state at `T - ε` (the stored time nearest to
/// it), with boundary data rebuilt from that state, and runs a new leg of
/// length `min(next_horizon, 0.9/K1)`. Requires `ε < T/5` for the span `T`
/// of the flow.
pub fn extend_time<T: Real>(flow: &FlowTrajectory<T>, restart_epsilon: T, next_horizon: T) -> Result<Extension<T>> {
    if flow.len() < 3 {
        return Err(YamabeError::InvalidParameter(
            "extension needs a flow with at least 3 states".into(),
        ));
    }
    let span = flow.last().t - flow.first().t;
    if !(restart_epsilon > T::zero()) || restart_epsilon * T::lit(5.0) >= span {
        return Err(YamabeError::InvalidParameter(format!(
            "restart epsilon {restart_epsilon} must lie in (0, T/5) for T = {span}"
        )));
    }
    if !(next_horizon > T::zero()) {
        return Err(YamabeError::InvalidParameter(format!(
            "next horizon must be positive, got {next_horizon}"
        )));
    }
    let mesh = &flow.mesh;
    let dim = mesh.dim();
    let k = flow.index_near(flow.last().t - restart_epsilon).max(1);
    let restart = flow.states[k].clone();
    let t_r = restart.t;
    let ops = flow.operators();
    let pair = curvature_pair(mesh, &ops, &flow.states[k - 1], &restart)?;
    let rim_r = flow.boundary.curvature(t_r);
    let n = mesh.len();
    let solved_sup = pair.r_elliptic[..n - 1]
        .iter()
        .copied()
        .fold(T::neg_infinity(), T::max);
    let k1 = solved_sup.max(rim_r.unwrap_or(T::neg_infinity())).max(T::zero());

    let mut r1 = crate::initial_data::scalar_curvature(&restart.u, mesh, &ops)?;
    if let Some(r) = rim_r {
        r1[n - 1] = r;
    }
    let mm1 = T::from_count(dim * (dim - 1));
    let kappa = restart
        .u
        .iter()
        .zip(r1.iter())
        .map(|(&u, &r)| r.abs().max(mm1 / u))
        .fold(T::zero(), T::max);
    let profile = BoundaryProfile::new(restart.u[n - 1], r1[n - 1], kappa, dim)?;
    let mut boundary = flow.boundary.clone();
    match boundary {
        BoundaryData::Profile { .. } => boundary.push_leg(t_r, profile)?,
        BoundaryData::Frozen { .. } => {}
    }
    let cap = if k1 > T::zero() {
        T::lit(HORIZON_FACTOR) / k1
    } else {
        T::infinity()
    };
    let leg = next_horizon.min(cap);
    let config = flow.config.with_t_final(leg.max(flow.config.dt));
    let solver = FlowSolver::new(mesh.clone(), config)?;
    let new_leg = solver.solve_from(restart, boundary.clone(), t_r + leg)?;

    let mut overlap = T::zero();
    let mut samples = 0;
    for s in &new_leg.states[1..] {
        if s.t > flow.last().t + flow.config.dt * T::lit(1e-6) {
            break;
        }
        let old = &flow.states[flow.index_near(s.t)];
        if (old.t - s.t).abs() <= flow.config.dt * T::lit(1e-6) {
            overlap = overlap.max(old.u.sup_distance(&s.u));
            samples += 1;
        }
    }
    let mut states = flow.states[..=k].to_vec();
    states.extend(new_leg.states[1..].iter().cloned());
    let mut steps = flow.steps[..k].to_vec();
    steps.extend(new_leg.steps.iter().copied());
    Ok(Extension {
        flow: FlowTrajectory {
            mesh: mesh.clone(),
            boundary,
            config: flow.config,
            states,
            steps,
        },
        restart_time: t_r,
        k1,
        leg_length: leg,
        overlap_sup: overlap,
        overlap_samples: samples,
    })
}

/// Repeats [`extend_time`] with `ε = span/10` until the flow reaches
/// `target`, failing if a restart makes no progress.
pub fn extend_until<T: Real>(flow: FlowTrajectory<T>, target: T, leg: T, max_restarts: usize) -> Result<Vec<Extension<T>>> {
    let mut out: Vec<Extension<T>> = Vec::new();
    let mut current = flow;
    while current.last().t < target {
        if out.len() >= max_restarts {
            return Err(YamabeError::InvalidParameter(format!(
                "did not reach t = {target} within {max_restarts} restarts"
            )));
        }
        let end = current.last().t;
        let span = end - current.first().t;
        let eps = (span / T::lit(10.0)).min(leg / T::lit(10.0));
        let ext = extend_time(&current, eps, leg.min(target - end + eps))?;
        if !(ext.flow.last().t > end) {
            return Err(YamabeError::InvalidParameter(format!(
                "restart at t = {} made no progress",
                ext.restart_time
            )));
        }
        current = ext.flow.clone();
        out.push(ext);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
