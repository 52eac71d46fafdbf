use super::{FlowState, FlowTrajectory};
use crate::error::{Result, YamabeError};
use crate::geometry::{RadialField, RadialMesh, RadialOperators};
use crate::initial_data::scalar_curvature;
use crate::scalar::Real;

/// Curvature across one step from the two available formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePair<T> {
    pub t_mid: T,
    /// `-(ln u⁺ - ln u)/dt`.
    pub r_rate: RadialField<T>,
    /// Spatial formula at the logarithmic mean `(u⁺ - u)/ln(u⁺/u)`.
    pub r_elliptic: RadialField<T>,
    /// Sup of the difference over nodes the stepper solves for.
    pub discrepancy: T,
}

/// `(b - a)/ln(b/a)`; the logarithmic mean makes both formulas coincide on
/// spatially constant flows.
fn log_mean<T: Real>(a: T, b: T) -> T {
    let x = b / a - T::one();
    if x == T::zero() {
        a
    } else {
        a * x / x.ln_1p()
    }
}

fn solved_nodes<T: Real>(mesh: &RadialMesh<T>) -> std::ops::Range<usize> {
    let first = usize::from(!mesh.has_origin());
    first..mesh.len() - 1
}

pub fn curvature_pair<T: Real>(
    mesh: &RadialMesh<T>,
    ops: &RadialOperators<T>,
    prev: &FlowState<T>,
    next: &FlowState<T>,
) -> Result<CurvaturePair<T>> {
    let dt = next.t - prev.t;
    if !(dt > T::zero()) {
        return Err(YamabeError::InvalidParameter(format!(
            "curvature pair needs increasing times, got {} then {}",
            prev.t, next.t
        )));
    }
    prev.u.ensure_len(mesh)?;
    next.u.ensure_len(mesh)?;
    prev.u.ensure_positive()?;
    next.u.ensure_positive()?;
    let rate: Vec<T> = prev
        .u
        .iter()
        .zip(next.u.iter())
        .map(|(&a, &b)| -(b / a).ln() / dt)
        .collect();
    let mid: Vec<T> = prev
        .u
        .iter()
        .zip(next.u.iter())
        .map(|(&a, &b)| log_mean(a, b))
        .collect();
    let elliptic = scalar_curvature(&mid, mesh, ops)?;
    let discrepancy = solved_nodes(mesh)
        .map(|i| (rate[i] - elliptic[i]).abs())
        .fold(T::zero(), T::max);
    Ok(CurvaturePair {
        t_mid: (prev.t + next.t) * T::lit(0.5),
        r_rate: RadialField::from_values(rate),
        r_elliptic: elliptic,
        discrepancy,
    })
}

/// Laplacian of the metric `u g`: `u^{-1}(Δf + (m-2)/2 ⟨∇ ln u, ∇f⟩)`.
pub fn conformal_laplacian<T: Real>(f: &[T], u: &[T], mesh: &RadialMesh<T>, ops: &RadialOperators<T>) -> Vec<T> {
    let half = T::from_count(mesh.dim() - 2) * T::lit(0.5);
    let lap = ops.laplacian(f);
    let df = ops.gradient(f);
    let du = ops.gradient(u);
    (0..f.len())
        .map(|i| (lap[i] + half * du[i] / u[i] * df[i]) / u[i])
        .collect()
}

/// Residual of `R_t = (m-1) Δ_g R + R²` along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EvoRResidual<T> {
    pub t_mid: Vec<T>,
    pub fields: Vec<RadialField<T>>,
    /// Per-step sup over solved nodes.
    pub sup: Vec<T>,
}

impl<T: Real> EvoRResidual<T> {
    pub fn max(&self) -> T {
        self.sup.iter().copied().fold(T::zero(), T::max)
    }

    /// Sup over steps whose midpoint lies at or after `t`. The first steps
    /// of a first-order scheme carry an `O(1)` layer, because the initial
    /// curvature has no time-discretization error while later states do.
    pub fn max_from(&self, t: T) -> T {
        self.sup
            .iter()
            .zip(&self.t_mid)
            .filter(|(_, &tm)| tm >= t)
            .map(|(&s, _)| s)
            .fold(T::zero(), T::max)
    }
}

/// Per step `k → k+1`:
/// `(R⁺ - R)/dt - R R⁺ - (m-1)(Δ_g R + Δ_{g⁺} R⁺)/2`, with `R` from the
/// spatial formula at each state. The product `R R⁺` makes the residual
/// vanish identically on spatially constant flows, where `R' = R²` exactly.
pub fn evo_r_residual<T: Real>(traj: &FlowTrajectory<T>) -> Result<EvoRResidual<T>> {
    if traj.len() < 3 {
        return Err(YamabeError::InvalidParameter(format!(
            "curvature evolution residual needs at least 3 states, got {}",
            traj.len()
        )));
    }
    let mesh = &traj.mesh;
    let ops = traj.operators();
    let m1 = T::from_count(mesh.dim() - 1);
    let half = T::lit(0.5);
    let curv = traj.elliptic_curvatures()?;
    let lap_g: Vec<Vec<T>> = curv
        .iter()
        .zip(&traj.states)
        .map(|(r, s)| conformal_laplacian(r, &s.u, mesh, &ops))
        .collect();
    let nodes = solved_nodes(mesh);
    let mut out = EvoRResidual {
        t_mid: Vec::new(),
        fields: Vec::new(),
        sup: Vec::new(),
    };
    for k in 0..traj.len() - 1 {
        let dt = traj.states[k + 1].t - traj.states[k].t;
        let (r0, r1) = (&curv[k], &curv[k + 1]);
        let field: Vec<T> = (0..mesh.len())
            .map(|i| {
                (r1[i] - r0[i]) / dt - r0[i] * r1[i] - m1 * half * (lap_g[k][i] + lap_g[k + 1][i])
            })
            .collect();
        out.sup.push(
            nodes
                .clone()
                .map(|i| field[i].abs())
                .fold(T::zero(), T::max),
        );
        out.t_mid
            .push((traj.states[k].t + traj.states[k + 1].t) * half);
        out.fields.push(RadialField::from_values(field));
    }
    Ok(out)
}
