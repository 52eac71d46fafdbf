//! Background geometries in rotational symmetry.
//!
//! Every field lives on the geodesic radius `r` of the background. For the
//! hyperbolic background the Poincaré radius is `rho = tanh(r/2)` and the
//! logarithmic polar coordinate is `s = -ln rho`; the Euclidean background
//! uses `r` directly.

mod coords;
mod mesh;
mod operators;

pub use coords::{
    coord_r_from_s, coord_s_from_r, flat_conformal_factor, flat_conformal_factor_log_polar,
    poincare_radius, RadialCoordinate,
};
pub use mesh::{RadialField, RadialMesh};
pub use operators::RadialOperators;

use crate::error::{Result, YamabeError};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Reference metric the conformal factor is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BackgroundKind {
    Hyperbolic,
    Euclidean,
}

impl BackgroundKind {
    pub fn name(self) -> &'static str {
        match self {
            BackgroundKind::Hyperbolic => "hyperbolic",
            BackgroundKind::Euclidean => "euclidean",
        }
    }

    /// Zeroth order term of the flow equation written as
    /// `u_t/(m-1) = c + Δu/u + (m-6)/4 |∇u|²/u²`; `c = m` on hyperbolic
    /// space (constant curvature -1) and `0` on flat space.
    pub fn zeroth_order_term<T: Real>(self, dim: usize) -> T {
        match self {
            BackgroundKind::Hyperbolic => T::from_count(dim),
            BackgroundKind::Euclidean => T::zero(),
        }
    }

    /// Radius of the geodesic sphere through `r`: `sinh r` or `r`.
    pub fn sphere_radius<T: Real>(self, r: T) -> T {
        match self {
            BackgroundKind::Hyperbolic => r.sinh(),
            BackgroundKind::Euclidean => r,
        }
    }

    /// Ratio of sphere areas `A(x) / A(y)` with `A = sphere_radius^(m-1)`,
    /// formed as a ratio first so large hyperbolic radii do not overflow.
    pub fn area_ratio<T: Real>(self, dim: usize, x: T, y: T) -> T {
        (self.sphere_radius(x) / self.sphere_radius(y)).powi(dim as i32 - 1)
    }

    /// First-order coefficient of the radial Laplacian, `(m-1) coth r` or
    /// `(m-1)/r`, for `r > 0`.
    pub fn first_order_coefficient<T: Real>(self, dim: usize, r: T) -> T {
        let k = T::from_count(dim - 1);
        match self {
            BackgroundKind::Hyperbolic => k / r.tanh(),
            BackgroundKind::Euclidean => k / r,
        }
    }
}

/// Value of the radial Laplacian's first-order coefficient at a radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaplacianCoefficient<T> {
    Value(T),
    /// `r = 0`: the coefficient is singular and the discretization switches
    /// to the regularized origin stencil `Δu(0) = m u_rr(0)`.
    Origin,
}

impl<T: Real> LaplacianCoefficient<T> {
    pub fn value(self) -> Option<T> {
        match self {
            LaplacianCoefficient::Value(v) => Some(v),
            LaplacianCoefficient::Origin => None,
        }
    }
}

/// `(m-1) coth r` on hyperbolic space (the Laplacian of the distance
/// function), `(m-1)/r` on flat space.
pub fn radial_laplacian_coefficient<T: Real>(
    r: T,
    mesh: &RadialMesh<T>,
) -> Result<LaplacianCoefficient<T>> {
    if !(r >= T::zero()) {
        return Err(YamabeError::Domain(format!(
            "radial Laplacian coefficient needs r >= 0, got {r}"
        )));
    }
    if r == T::zero() {
        return Ok(LaplacianCoefficient::Origin);
    }
    Ok(LaplacianCoefficient::Value(
        mesh.background().first_order_coefficient(mesh.dim(), r),
    ))
}

/// Length of the radial ray between `r0` and `r1` in the metric
/// `u · g_background`, i.e. the composite trapezoid rule for `∫ √u dr`.
/// Endpoints that fall between nodes are handled by linear interpolation of
/// `√u`.
pub fn radial_length<T: Real>(u: &RadialField<T>, mesh: &RadialMesh<T>, r0: T, r1: T) -> Result<T> {
    if u.len() != mesh.len() {
        return Err(YamabeError::InvalidParameter(format!(
            "field has {} values, mesh has {} nodes",
            u.len(),
            mesh.len()
        )));
    }
    let tol = mesh.dr() * T::lit(1e-9);
    if !(r0 < r1) || r0 < mesh.r_min() - tol || r1 > mesh.r_max() + tol {
        return Err(YamabeError::Domain(format!(
            "length interval [{r0}, {r1}] outside mesh [{}, {}]",
            mesh.r_min(),
            mesh.r_max()
        )));
    }
    let r0 = r0.max(mesh.r_min());
    let r1 = r1.min(mesh.r_max());
    let nodes = mesh.nodes();
    let lo = mesh.cell_of(r0);
    let hi = mesh.cell_of(r1);
    for i in lo..=(hi + 1).min(mesh.len() - 1) {
        if !(u[i] > T::zero()) || !u[i].is_finite() {
            return Err(YamabeError::InvalidField {
                node: i,
                value: u[i].as_f64(),
            });
        }
    }
    let root = |i: usize| u[i].sqrt();
    let interp = |r: T| {
        let i = mesh.cell_of(r);
        if i + 1 >= mesh.len() {
            return root(mesh.len() - 1);
        }
        let w = (r - nodes[i]) / mesh.dr();
        root(i) * (T::one() - w) + root(i + 1) * w
    };
    let half = T::lit(0.5);
    if lo == hi {
        return Ok((interp(r0) + interp(r1)) * half * (r1 - r0));
    }
    // partial first cell, full interior cells, partial last cell
    let mut total = (interp(r0) + root(lo + 1)) * half * (nodes[lo + 1] - r0);
    for i in (lo + 1)..hi {
        total = total + (root(i) + root(i + 1)) * half * (nodes[i + 1] - nodes[i]);
    }
    total = total + (root(hi) + interp(r1)) * half * (r1 - nodes[hi]);
    Ok(total)
}
