use crate::error::{Result, YamabeError};
use crate::scalar::Real;
use crate::solver::FlowTrajectory;

/// Per stored time, the sup over `r <= ℓ - margin` of
/// `w = U^{-1/2} |∇U|²` with `U = u^η`. Returns `(t, sup w)` pairs.
pub fn gradient_quantity_sup<T: Real>(traj: &FlowTrajectory<T>, margin: T) -> Result<Vec<(T, T)>> {
    if !(margin >= T::one()) {
        return Err(YamabeError::InvalidParameter(format!(
            "gradient quantity margin must be >= 1, got {margin}"
        )));
    }
    let mesh = &traj.mesh;
    let reach = mesh.r_max() - margin;
    if reach < mesh.r_min() {
        return Err(YamabeError::InvalidParameter(format!(
            "margin {margin} leaves no interior ball inside radius {}",
            mesh.r_max()
        )));
    }
    let last = mesh
        .nodes()
        .iter()
        .rposition(|&r| r <= reach + mesh.dr() * T::lit(1e-9))
        .unwrap_or(0);
    let ops = traj.operators();
    let eta = mesh.eta();
    Ok(traj
        .states
        .iter()
        .map(|s| {
            let big_u = s.big_u(eta);
            let du = ops.gradient(&big_u);
            let sup = (0..=last)
                .map(|i| du[i] * du[i] / big_u[i].sqrt())
                .fold(T::zero(), T::max);
            (s.t, sup)
        })
        .collect())
}
