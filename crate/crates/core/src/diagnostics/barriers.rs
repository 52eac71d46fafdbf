use super::BARRIER_TOLERANCE;
use crate::boundary_data::{lower_curvature_bound, upper_curvature_bound, BoundaryData};
use crate::error::Result;
use crate::geometry::{flat_conformal_factor, BackgroundKind};
use crate::initial_data::DataBounds;
use crate::scalar::Real;
use crate::solver::FlowTrajectory;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum CheckStatus {
    Checked,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierCheck {
    pub name: String,
    pub status: CheckStatus,
    pub worst_slack: f64,
    pub worst_node: usize,
    pub worst_time: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BarrierCheck {
    fn skipped(name: &str, reason: &str) -> Self {
        Self {
            name: name.to_string(),
            status: CheckStatus::Skipped(reason.to_string()),
            worst_slack: f64::NAN,
            worst_node: 0,
            worst_time: f64::NAN,
            pass: true,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub tolerance: f64,
    /// `ε` used for the lower curvature bound.
    pub eps: f64,
    pub k0: f64,
    pub checks: Vec<BarrierCheck>,
    pub pass: bool,
}

impl BarrierReport {
    pub fn check(&self, name: &str) -> Option<&BarrierCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierOptions<T> {
    pub tolerance: T,
    /// Scale `b` of the flat upper barrier; the flat check is skipped
    /// without it.
    pub b_flat: Option<T>,
    /// Overrides the `ε` of the lower curvature bound.
    pub eps: Option<T>,
}

impl<T: Real> Default for BarrierOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(BARRIER_TOLERANCE),
            b_flat: None,
            eps: None,
        }
    }
}

/// `ε` for the lower curvature bound: the interior floor from the data,
/// lowered if the rim profile needs a smaller one.
pub fn reported_eps<T: Real>(bounds: &DataBounds<T>, boundary: &BoundaryData<T>) -> T {
    let rim = match boundary {
        BoundaryData::Profile { legs } => legs
            .first()
            .map(|l| l.profile.largest_admissible_eps(10_000))
            .unwrap_or(T::infinity()),
        BoundaryData::Frozen { .. } => T::infinity(),
    };
    bounds.eps_floor.min(rim)
}

struct Worst {
    slack: f64,
    node: usize,
    time: f64,
}

impl Worst {
    fn new() -> Self {
        Self {
            slack: f64::INFINITY,
            node: 0,
            time: f64::NAN,
        }
    }

    fn see<T: Real>(&mut self, slack: T, node: usize, t: T) {
        let s = slack.as_f64();
        if s < self.slack || s.is_nan() {
            self.slack = s;
            self.node = node;
            self.time = t.as_f64();
        }
    }

    fn finish(self, name: &str, tolerance: f64, note: Option<&str>) -> BarrierCheck {
        BarrierCheck {
            name: name.to_string(),
            status: CheckStatus::Checked,
            pass: self.slack >= -tolerance,
            worst_slack: self.slack,
            worst_node: self.node,
            worst_time: self.time,
            note: note.map(str::to_string),
        }
    }
}

pub fn check_barriers<T: Real>(traj: &FlowTrajectory<T>, bounds: &DataBounds<T>, b_flat: Option<T>) -> Result<BarrierReport> {
    check_barriers_with(
        traj,
        bounds,
        &BarrierOptions {
            b_flat,
            ..BarrierOptions::default()
        },
    )
}

/// Worst slack of the six pointwise inequalities over every node and stored
/// time:
///
/// * `sandwich_lower`, `sandwich_upper`:
///   `m(m-1)t + min u0/3 <= u <= m(m-1)t + 5 max u0/3`
/// * `curvature_lower`, `curvature_upper`: `-1/(t+ε) <= R <= K0/(1-K0t)`, with
///   `R` from the spatial formula and the exact `-φ'/φ` on the rim; the upper
///   side only for `t < 1/K0`
/// * `flat_upper`: `u^η <= (m(m-1)t)^η + (b h^{-2})^η`, only when the
///   initial data lies below `b h^{-2}`
/// * `big_bang_lower`: `u >= m(m-1)t`
pub fn check_barriers_with<T: Real>(
    traj: &FlowTrajectory<T>,
    bounds: &DataBounds<T>,
    options: &BarrierOptions<T>,
) -> Result<BarrierReport> {
    let tol = options.tolerance.as_f64();
    let names = [
        "sandwich_lower",
        "sandwich_upper",
        "curvature_lower",
        "curvature_upper",
        "flat_upper",
        "big_bang_lower",
    ];
    let eps = options
        .eps
        .unwrap_or_else(|| reported_eps(bounds, &traj.boundary));
    if traj.mesh.background() != BackgroundKind::Hyperbolic {
        return Ok(BarrierReport {
            tolerance: tol,
            eps: eps.as_f64(),
            k0: bounds.k0.as_f64(),
            checks: names
                .iter()
                .map(|n| BarrierCheck::skipped(n, "barriers are stated over hyperbolic space"))
                .collect(),
            pass: true,
        });
    }
    let mesh = &traj.mesh;
    let n = mesh.len();
    let mm1 = T::from_count(mesh.dim() * (mesh.dim() - 1));
    let eta = mesh.eta();
    let third = T::one() / T::lit(3.0);
    let curv = traj.elliptic_curvatures()?;

    let flat: Option<Vec<T>> = match options.b_flat {
        Some(b) => Some(
            mesh.nodes()
                .iter()
                .map(|&r| flat_conformal_factor(r, b))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let flat_gate = flat.as_ref().map(|f| {
        traj.first()
            .u
            .iter()
            .zip(f)
            .all(|(&u, &fl)| u <= fl * (T::one() + T::lit(1e-12)))
    });

    let mut worst: Vec<Worst> = (0..6).map(|_| Worst::new()).collect();
    let mut upper_checked = false;
    for (state, r_field) in traj.states.iter().zip(&curv) {
        let t = state.t;
        let bang = mm1 * t;
        let upper_live = !(bounds.k0 > T::zero() && bounds.k0 * t >= T::one());
        upper_checked |= upper_live;
        for i in 0..n {
            let u = state.u[i];
            worst[0].see(u - (bang + bounds.u0_min * third), i, t);
            worst[1].see(bang + T::lit(5.0) * third * bounds.c0 - u, i, t);
            let r = if i + 1 == n {
                traj.boundary.curvature(t).unwrap_or(r_field[i])
            } else {
                r_field[i]
            };
            worst[2].see(r - lower_curvature_bound(eps, t), i, t);
            if upper_live {
                worst[3].see(upper_curvature_bound(bounds.k0, t) - r, i, t);
            }
            if let (Some(f), Some(true)) = (&flat, flat_gate) {
                let cap = bang.powf(eta) + f[i].powf(eta);
                worst[4].see(cap - u.powf(eta), i, t);
            }
            worst[5].see(u - bang, i, t);
        }
    }
    let mut checks = Vec::with_capacity(6);
    for (k, w) in worst.into_iter().enumerate() {
        let name = names[k];
        let check = match k {
            3 if !upper_checked => BarrierCheck::skipped(name, "no stored time before 1/K0"),
            4 => match flat_gate {
                None => BarrierCheck::skipped(name, "no flat scale b supplied"),
                Some(false) => BarrierCheck::skipped(name, "initial data not below b g_E"),
                Some(true) => w.finish(name, tol, None),
            },
            5 => w.finish(name, tol, Some("symmetric case")),
            _ => w.finish(name, tol, None),
        };
        checks.push(check);
    }
    Ok(BarrierReport {
        tolerance: tol,
        eps: eps.as_f64(),
        k0: bounds.k0.as_f64(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::BoundaryProfile;
    use crate::geometry::{RadialField, RadialMesh};
    use crate::initial_data::{data_bounds, initial_scalar_curvature, make_initial, InitialPreset};
    use crate::solver::{solve, SolveConfig};

    fn run(preset: InitialPreset<f64>, n: usize, t: f64) -> (FlowTrajectory<f64>, DataBounds<f64>) {
        let mesh = RadialMesh::new(BackgroundKind::Hyperbolic, 3, 0.0, 5.0, n).unwrap();
        let u0 = make_initial(&preset, &mesh).unwrap();
        let r = initial_scalar_curvature(&u0, &mesh).unwrap();
        let b = data_bounds(&u0, &r, 3).unwrap();
        let p = BoundaryProfile::from_initial(&u0, &r, &b, 3).unwrap();
        let traj = solve(&u0, &mesh, BoundaryData::profile(p), &SolveConfig::new(1e-3, t)).unwrap();
        (traj, b)
    }

    #[test]
    fn constant_flow_slacks() {
        let (traj, b) = run(InitialPreset::Constant { c: 1.0 }, 100, 0.2);
        let rep = check_barriers(&traj, &b, None).unwrap();
        assert!(rep.pass);
        let lo = rep.check("sandwich_lower").unwrap();
        assert!((lo.worst_slack - 2.0 / 3.0).abs() < 1e-10);
        let hi = rep.check("sandwich_upper").unwrap();
        assert!((hi.worst_slack - 2.0 / 3.0).abs() < 1e-10);
        let p23 = rep.check("big_bang_lower").unwrap();
        assert!((p23.worst_slack - 1.0).abs() < 1e-10);
        assert_eq!(p23.note.as_deref(), Some("symmetric case"));
        // R = -6/(1+6t) against -1/(t + 1/6) = -6/(1+6t): equality
        assert!(rep.check("curvature_lower").unwrap().worst_slack.abs() < 1e-10);
        // upper side: 0 - R >= 6/(1+1.2)
        let up = rep.check("curvature_upper").unwrap();
        assert!((up.worst_slack - 6.0 / 2.2).abs() < 1e-10);
        assert_eq!(
            rep.check("flat_upper").unwrap().status,
            CheckStatus::Skipped("no flat scale b supplied".into())
        );
    }

    #[test]
    fn flat_barrier_on_static_data() {
        let (traj, b) = run(InitialPreset::FlatStatic { b: 1.0 }, 200, 0.05);
        let rep = check_barriers(&traj, &b, Some(1.0)).unwrap();
        let c = rep.check("flat_upper").unwrap();
        assert_eq!(c.status, CheckStatus::Checked);
        assert!(c.pass && c.worst_slack.abs() < 1e-12, "{c:?}");
        assert_eq!(c.worst_time, 0.0);
        // a smaller flat scale no longer dominates the data
        let rep = check_barriers(&traj, &b, Some(0.5)).unwrap();
        assert!(matches!(rep.check("flat_upper").unwrap().status, CheckStatus::Skipped(_)));
    }

    #[test]
    fn bump_passes_all() {
        let preset = InitialPreset::Bump {
            base: 1.0,
            amplitude: 1.0,
            center: 2.0,
            width: 0.5,
        };
        let (traj, b) = run(preset, 250, 0.3);
        let rep = check_barriers(&traj, &b, None).unwrap();
        assert!(rep.pass, "{rep:#?}");
    }

    #[test]
    fn euclidean_runs_are_skipped() {
        let mesh = RadialMesh::new(BackgroundKind::Euclidean, 3, 1.0, 5.0, 40).unwrap();
        let u0 = make_initial(&InitialPreset::PowerLaw { b: 1.0 }, &mesh).unwrap();
        let r = initial_scalar_curvature(&u0, &mesh).unwrap();
        let b = data_bounds(&u0, &r, 3).unwrap();
        let traj = solve(&u0, &mesh, BoundaryData::Frozen { value: u0[40] }, &SolveConfig::new(1e-2, 0.05)).unwrap();
        let rep = check_barriers(&traj, &b, None).unwrap();
        assert!(rep.checks.iter().all(|c| matches!(c.status, CheckStatus::Skipped(_))));
        let _ = RadialField::constant(&mesh, 1.0);
    }

    #[test]
    fn violation_is_reported() {
        let (mut traj, b) = run(InitialPreset::Constant { c: 1.0 }, 50, 0.05);
        traj.states[10].u[7] = 0.01;
        let rep = check_barriers(&traj, &b, None).unwrap();
        let c = rep.check("big_bang_lower").unwrap();
        assert!(!c.pass && c.worst_node == 7);
        assert!(!rep.pass);
    }
}
