//! Semi-implicit time stepping of the radial flow
//! `u_t/(m-1) = c + Δu/u + (m-6)/4 |∇u|²/u²` with Dirichlet data at the rim.

mod curvature;
mod tridiag;

pub use curvature::{conformal_laplacian, curvature_pair, evo_r_residual, CurvaturePair, EvoRResidual};
pub use tridiag::solve_tridiagonal;

use crate::boundary_data::BoundaryData;
use crate::error::{Result, YamabeError};
use crate::geometry::{RadialField, RadialMesh, RadialOperators};
use crate::initial_data::scalar_curvature;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Default cap on recursive step halvings after a positivity failure.
pub const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientTreatment {
    /// `⟨∇u, ∇u⁺⟩`: linear in the new iterate.
    #[default]
    ImplicitLinearized,
    /// `|∇u|²` from the old iterate.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig<T> {
    pub dt: T,
    pub t_final: T,
    pub gradient: GradientTreatment,
    /// Weight of the new iterate in the Laplacian: 1 is backward Euler,
    /// 0.5 Crank–Nicolson.
    pub theta: T,
    pub max_halvings: usize,
}

impl<T: Real> SolveConfig<T> {
    pub fn new(dt: T, t_final: T) -> Self {
        Self {
            dt,
            t_final,
            gradient: GradientTreatment::ImplicitLinearized,
            theta: T::one(),
            max_halvings: MAX_HALVINGS,
        }
    }

    pub fn with_theta(mut self, theta: T) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_gradient(mut self, gradient: GradientTreatment) -> Self {
        self.gradient = gradient;
        self
    }

    pub fn with_t_final(mut self, t_final: T) -> Self {
        self.t_final = t_final;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(YamabeError::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final >= self.dt) || !self.t_final.is_finite() {
            return Err(YamabeError::InvalidParameter(format!(
                "horizon {} must be finite and at least one time step {}",
                self.t_final, self.dt
            )));
        }
        if !(self.theta >= T::lit(0.5) && self.theta <= T::one()) {
            return Err(YamabeError::InvalidParameter(format!(
                "theta must lie in [0.5, 1], got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState<T> {
    pub t: T,
    pub u: RadialField<T>,
}

impl<T: Real> FlowState<T> {
    /// `U = u^η`.
    pub fn big_u(&self, eta: T) -> RadialField<T> {
        self.u.map(|x| x.powf(eta))
    }
}

/// Bookkeeping for one recorded step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord<T> {
    pub t: T,
    /// Linear solves used; more than one after a positivity failure.
    pub substeps: usize,
    pub halvings: usize,
    /// Rows whose off-diagonals were not all nonpositive.
    pub m_matrix_violations: usize,
    pub min_u: T,
    pub curvature_discrepancy: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory<T> {
    pub mesh: RadialMesh<T>,
    pub boundary: BoundaryData<T>,
    pub config: SolveConfig<T>,
    pub states: Vec<FlowState<T>>,
    /// `steps[k]` describes the step from `states[k]` to `states[k + 1]`.
    pub steps: Vec<StepRecord<T>>,
}

impl<T: Real> FlowTrajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<T> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> &FlowState<T> {
        &self.states[0]
    }

    pub fn last(&self) -> &FlowState<T> {
        &self.states[self.states.len() - 1]
    }

    /// Index of the stored state closest in time to `t`.
    pub fn index_near(&self, t: T) -> usize {
        let mut best = 0;
        for (k, s) in self.states.iter().enumerate() {
            if (s.t - t).abs() < (self.states[best].t - t).abs() {
                best = k;
            }
        }
        best
    }

    pub fn operators(&self) -> RadialOperators<T> {
        RadialOperators::new(&self.mesh)
    }

    /// Curvature of each stored state from the spatial formula.
    pub fn elliptic_curvatures(&self) -> Result<Vec<RadialField<T>>> {
        let ops = self.operators();
        self.states
            .iter()
            .map(|s| scalar_curvature(&s.u, &self.mesh, &ops))
            .collect()
    }

    /// The same flow seen on the ball of radius `r_max`, which must be a
    /// mesh node.
    pub fn restricted(&self, r_max: T) -> Result<Self> {
        let mesh = self.mesh.truncated(r_max)?;
        let n = mesh.len();
        Ok(Self {
            states: self
                .states
                .iter()
                .map(|s| FlowState {
                    t: s.t,
                    u: RadialField::from_values(s.u[..n].to_vec()),
                })
                .collect(),
            mesh,
            boundary: self.boundary.clone(),
            config: self.config,
            steps: self.steps.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct StepCounters {
    substeps: usize,
    halvings: usize,
    violations: usize,
}

impl StepCounters {
    fn join(self, other: Self) -> Self {
        Self {
            substeps: self.substeps + other.substeps,
            halvings: self.halvings.max(other.halvings),
            violations: self.violations + other.violations,
        }
    }
}

/// Time stepper bound to one mesh.
#[derive(Debug, Clone)]
pub struct FlowSolver<T> {
    mesh: RadialMesh<T>,
    ops: RadialOperators<T>,
    config: SolveConfig<T>,
}

impl<T: Real> FlowSolver<T> {
    pub fn new(mesh: RadialMesh<T>, config: SolveConfig<T>) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            ops: RadialOperators::new(&mesh),
            mesh,
            config,
        })
    }

    pub fn mesh(&self) -> &RadialMesh<T> {
        &self.mesh
    }

    pub fn operators(&self) -> &RadialOperators<T> {
        &self.ops
    }

    pub fn config(&self) -> &SolveConfig<T> {
        &self.config
    }

    fn is_dirichlet(&self, i: usize) -> bool {
        i + 1 == self.mesh.len() || (i == 0 && !self.mesh.has_origin())
    }

    /// One linear solve of size `dt` with rim value `phi_next`. The inner rim
    /// of an annulus keeps its current value. Returns the new field and the
    /// number of rows that lost the M-matrix sign pattern.
    ///
    /// The system is solved for the increment `δ = u⁺ - u`, whose right-hand
    /// side is `dt` times the full explicit operator. On spatially constant
    /// data every row then sees the same numbers, so the field stays constant
    /// to rounding instead of picking up back-substitution noise.
    pub fn step(&self, state: &FlowState<T>, phi_next: T, dt: T) -> Result<(FlowState<T>, usize)> {
        let u = &state.u;
        u.ensure_len(&self.mesh)?;
        let n = u.len();
        let dim = self.mesh.dim();
        let k = dt * T::from_count(dim - 1);
        let c0: T = self.mesh.background().zeroth_order_term(dim);
        let beta = T::from_count(dim) * T::lit(0.25) - T::lit(1.5);
        let theta = self.config.theta;
        let two_h = self.mesh.dr() + self.mesh.dr();
        let grad = self.ops.gradient(u);
        let lap = self.ops.laplacian(u);
        let (mut a, mut b, mut c, mut d) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
        let mut violations = 0;
        for i in 0..n {
            if self.is_dirichlet(i) {
                b[i] = T::one();
                d[i] = if i + 1 == n { phi_next - u[i] } else { T::zero() };
                continue;
            }
            let (wl, wu) = self.ops.row(i);
            let inv = T::one() / u[i];
            let q = grad[i] * inv;
            let gc = match self.config.gradient {
                GradientTreatment::ImplicitLinearized => beta * q * inv / two_h,
                GradientTreatment::Explicit => T::zero(),
            };
            a[i] = -k * (theta * wl * inv - gc);
            c[i] = -k * (theta * wu * inv + gc);
            b[i] = T::one() + k * theta * (wl + wu) * inv;
            d[i] = k * (c0 + lap[i] * inv + beta * q * q);
            if a[i] > T::zero() || c[i] > T::zero() {
                violations += 1;
            }
        }
        let delta = solve_tridiagonal(&a, &b, &c, &d)?;
        let mut x: Vec<T> = u.iter().zip(&delta).map(|(&v, &e)| v + e).collect();
        x[n - 1] = phi_next;
        let t_next = state.t + dt;
        if let Some(node) = x.iter().position(|&v| !(v > T::zero()) || !v.is_finite()) {
            return Err(YamabeError::StepFailure {
                node,
                r: self.mesh.nodes()[node].as_f64(),
                value: x[node].as_f64(),
                t: t_next.as_f64(),
                retries: 0,
            });
        }
        Ok((
            FlowState {
                t: t_next,
                u: RadialField::from_values(x),
            },
            violations,
        ))
    }

    fn advance(&self, state: &FlowState<T>, dt: T, boundary: &BoundaryData<T>, depth: usize) -> Result<(FlowState<T>, StepCounters)> {
        match self.step(state, boundary.value(state.t + dt), dt) {
            Ok((next, violations)) => Ok((
                next,
                StepCounters {
                    substeps: 1,
                    halvings: depth,
                    violations,
                },
            )),
            Err(YamabeError::StepFailure { node, r, value, t, .. }) => {
                if depth >= self.config.max_halvings {
                    return Err(YamabeError::StepFailure {
                        node,
                        r,
                        value,
                        t,
                        retries: depth,
                    });
                }
                let half = dt * T::lit(0.5);
                let (mid, first) = self.advance(state, half, boundary, depth + 1)?;
                let (mut end, second) = self.advance(&mid, dt - half, boundary, depth + 1)?;
                end.t = state.t + dt;
                Ok((end, first.join(second)))
            }
            Err(e) => Err(e),
        }
    }

    /// Runs from `u0` at `t = 0` to the configured horizon.
    pub fn solve(&self, u0: &RadialField<T>, boundary: BoundaryData<T>) -> Result<FlowTrajectory<T>> {
        let start = FlowState {
            t: T::zero(),
            u: u0.clone(),
        };
        self.solve_from(start, boundary, self.config.t_final)
    }

    /// Runs from an arbitrary state to `t_end` on the grid
    /// `start.t + k dt`, shortening the last step to land on `t_end`.
    pub fn solve_from(&self, start: FlowState<T>, boundary: BoundaryData<T>, t_end: T) -> Result<FlowTrajectory<T>> {
        start.u.ensure_len(&self.mesh)?;
        start.u.ensure_positive()?;
        if !(t_end > start.t) || !t_end.is_finite() {
            return Err(YamabeError::InvalidParameter(format!(
                "end time {t_end} must be finite and after the start {}",
                start.t
            )));
        }
        let rim = start.u[start.u.len() - 1];
        let phi0 = boundary.value(start.t);
        if (phi0 - rim).abs() > T::lit(1e-10) * rim.abs().max(T::one()) {
            return Err(YamabeError::Config(format!(
                "boundary data {phi0} does not match the initial rim value {rim} at t = {}",
                start.t
            )));
        }
        let dt = self.config.dt;
        let span = t_end - start.t;
        let count = ((span / dt) - T::lit(1e-9)).ceil().max(T::one());
        let count = count.to_usize().ok_or_else(|| {
            YamabeError::InvalidParameter(format!("too many steps for horizon {span}"))
        })?;
        let t0 = start.t;
        let mut states = Vec::with_capacity(count + 1);
        let mut steps = Vec::with_capacity(count);
        states.push(start);
        for j in 1..=count {
            let t_next = if j == count {
                t_end
            } else {
                t0 + dt * T::from_count(j)
            };
            let prev = &states[j - 1];
            let (mut next, counters) = self.advance(prev, t_next - prev.t, &boundary, 0)?;
            next.t = t_next;
            let pair = curvature_pair(&self.mesh, &self.ops, prev, &next)?;
            steps.push(StepRecord {
                t: t_next,
                substeps: counters.substeps,
                halvings: counters.halvings,
                m_matrix_violations: counters.violations,
                min_u: next.u.min(),
                curvature_discrepancy: pair.discrepancy,
            });
            states.push(next);
        }
        Ok(FlowTrajectory {
            mesh: self.mesh.clone(),
            boundary,
            config: self.config,
            states,
            steps,
        })
    }
}

/// One step on `mesh`; builds the discrete operators on each call.
pub fn step<T: Real>(
    state: &FlowState<T>,
    mesh: &RadialMesh<T>,
    phi_next: T,
    config: &SolveConfig<T>,
) -> Result<FlowState<T>> {
    FlowSolver::new(mesh.clone(), *config)?
        .step(state, phi_next, config.dt)
        .map(|(s, _)| s)
}

/// Solves `u(0) = u0`, `u = φ` on the rim, up to `config.t_final`.
pub fn solve<T: Real>(
    u0: &RadialField<T>,
    mesh: &RadialMesh<T>,
    boundary: BoundaryData<T>,
    config: &SolveConfig<T>,
) -> Result<FlowTrajectory<T>> {
    FlowSolver::new(mesh.clone(), *config)?.solve(u0, boundary)
}
