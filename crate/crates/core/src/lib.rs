//! Yamabe flow `∂_t g = -R g` of rotationally symmetric metrics conformal to
//! hyperbolic or flat space.
//!
//! The metric is `g = u · g_background` with `u(r, t) > 0`. The flow is
//! solved on geodesic balls (or flat annuli) with a semi-implicit scheme.
//! Boundary data are built so that the flow stays between its barriers, and
//! a ladder of balls approximates the flow on the whole space. The
//! diagnostics check barriers, curvature bounds, ordering of flows and
//! completeness of the evolving metric.
//!
//! ```
//! use yamabe_core::initial_data::{data_bounds, initial_scalar_curvature, make_initial};
//! use yamabe_core::{solver::solve, BackgroundKind, BoundaryData, BoundaryProfile, Mesh64, Preset64, SolveConfig};
//!
//! let mesh = Mesh64::new(BackgroundKind::Hyperbolic, 3, 0.0, 3.0, 60)?;
//! let u0 = make_initial(&Preset64::Constant { c: 1.0 }, &mesh)?;
//! let r0 = initial_scalar_curvature(&u0, &mesh)?;
//! let bounds = data_bounds(&u0, &r0, 3)?;
//! let profile = BoundaryProfile::from_initial(&u0, &r0, &bounds, 3)?;
//! let traj = solve(&u0, &mesh, BoundaryData::profile(profile), &SolveConfig::new(0.01, 0.5))?;
//! // u ≡ 1 evolves as 1 + 6t in three dimensions.
//! assert!((traj.last().u[0] - 4.0).abs() < 1e-10);
//! # Ok::<(), yamabe_core::YamabeError>(())
//! ```
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary_data;
pub mod cli_io;
pub mod diagnostics;
pub mod error;
pub mod exhaustion;
pub mod geometry;
pub mod initial_data;
pub mod scalar;
pub mod solver;

pub use boundary_data::{BoundaryData, BoundaryProfile};
pub use error::{Result, YamabeError};
pub use geometry::{BackgroundKind, RadialField, RadialMesh, RadialOperators};
pub use initial_data::{DataBounds, InitialPreset};
pub use scalar::Real;
pub use solver::{FlowSolver, FlowState, FlowTrajectory, GradientTreatment, SolveConfig};

pub type Mesh64 = RadialMesh<f64>;
pub type Field64 = RadialField<f64>;
pub type Preset64 = InitialPreset<f64>;
pub type Boundary64 = BoundaryData<f64>;
pub type Config64 = SolveConfig<f64>;
pub type Solver64 = FlowSolver<f64>;
pub type Trajectory64 = FlowTrajectory<f64>;

pub type Mesh32 = RadialMesh<f32>;
pub type Field32 = RadialField<f32>;
pub type Preset32 = InitialPreset<f32>;
pub type Boundary32 = BoundaryData<f32>;
pub type Config32 = SolveConfig<f32>;
pub type Solver32 = FlowSolver<f32>;
pub type Trajectory32 = FlowTrajectory<f32>;
