//! Preset initial conformal factors, their scalar curvature, and the
//! constants `C0`, `K0`, `κ`, `ε` that parameterize a run.

use crate::error::{Result, YamabeError};
use crate::geometry::{flat_conformal_factor, BackgroundKind, RadialField, RadialMesh, RadialOperators};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Smallest inner radius allowed for the singular power-law data.
pub const POWER_LAW_MIN_RADIUS: f64 = 0.1;

/// Default cap on the reported curvature lower-bound parameter `ε`.
pub const EPS_FLOOR_CAP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialPreset<T> {
    /// `u0 ≡ c`.
    Constant { c: T },
    /// `u0 = b h^{-2}`, the flat metric `b g_E` written over `g_H`; static.
    FlatStatic { b: T },
    /// `base + amplitude exp(-(r - center)² / width²)`.
    Bump {
        base: T,
        amplitude: T,
        center: T,
        width: T,
    },
    /// Round unit sphere minus a point over flat space: `4 / (1 + r²)²`.
    PuncturedSphere,
    /// `b r^{-4}` over flat space, singular at the origin.
    PowerLaw { b: T },
}

impl<T: Real> InitialPreset<T> {
    pub fn name(&self) -> &'static str {
        match self {
            InitialPreset::Constant { .. } => "constant",
            InitialPreset::FlatStatic { .. } => "flatstatic",
            InitialPreset::Bump { .. } => "bump",
            InitialPreset::PuncturedSphere => "puncturedsphere",
            InitialPreset::PowerLaw { .. } => "powerlaw",
        }
    }

    /// Background the preset is defined over, if it is tied to one.
    pub fn required_background(&self) -> Option<BackgroundKind> {
        match self {
            InitialPreset::FlatStatic { .. } => Some(BackgroundKind::Hyperbolic),
            InitialPreset::PuncturedSphere | InitialPreset::PowerLaw { .. } => {
                Some(BackgroundKind::Euclidean)
            }
            InitialPreset::Constant { .. } | InitialPreset::Bump { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: T| {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(YamabeError::InvalidParameter(format!(
                    "{} parameter {name} must be positive, got {x}",
                    self.name()
                )))
            }
        };
        match *self {
            InitialPreset::Constant { c } => positive("c", c),
            InitialPreset::FlatStatic { b } | InitialPreset::PowerLaw { b } => positive("b", b),
            InitialPreset::Bump {
                base,
                amplitude,
                center,
                width,
            } => {
                positive("base", base)?;
                positive("amplitude", amplitude)?;
                positive("width", width)?;
                if center >= T::zero() && center.is_finite() {
                    Ok(())
                } else {
                    Err(YamabeError::InvalidParameter(format!(
                        "bump center must be >= 0, got {center}"
                    )))
                }
            }
            InitialPreset::PuncturedSphere => Ok(()),
        }
    }

    /// Value of the preset at a radius, without mesh checks.
    pub fn value_at(&self, r: T) -> T {
        match *self {
            InitialPreset::Constant { c } => c,
            InitialPreset::FlatStatic { b } => {
                flat_conformal_factor(r, b).unwrap_or_else(|_| T::nan())
            }
            InitialPreset::Bump {
                base,
                amplitude,
                center,
                width,
            } => {
                let z = (r - center) / width;
                base + amplitude * (-z * z).exp()
            }
            InitialPreset::PuncturedSphere => {
                let d = T::one() + r * r;
                T::lit(4.0) / (d * d)
            }
            InitialPreset::PowerLaw { b } => b / r.powi(4),
        }
    }
}

/// Samples a preset on a mesh.
pub fn make_initial<T: Real>(preset: &InitialPreset<T>, mesh: &RadialMesh<T>) -> Result<RadialField<T>> {
    preset.validate()?;
    if let Some(required) = preset.required_background() {
        if required != mesh.background() {
            return Err(YamabeError::PresetMismatch {
                preset: preset.name(),
                required: required.name(),
                found: mesh.background().name(),
            });
        }
    }
    if let InitialPreset::PowerLaw { .. } = preset {
        if mesh.r_min() < T::lit(POWER_LAW_MIN_RADIUS) {
            return Err(YamabeError::InvalidParameter(format!(
                "powerlaw data is singular at the origin; r_min must be >= {POWER_LAW_MIN_RADIUS}, got {}",
                mesh.r_min()
            )));
        }
    }
    let u = RadialField::from_fn(mesh, |r| preset.value_at(r));
    u.ensure_positive()?;
    Ok(u)
}

/// Scalar curvature of `u g_background` from the flow's own spatial operator:
/// `R = -(m-1)/u [c + Δu/u + (m-6)/4 |∇u|²/u²]`, `c = m` over hyperbolic
/// space and `0` over flat space. Shares its discrete operators with the
/// solver, so `R = -u_t/u` holds at the discrete level.
pub fn scalar_curvature<T: Real>(
    u: &[T],
    mesh: &RadialMesh<T>,
    ops: &RadialOperators<T>,
) -> Result<RadialField<T>> {
    if u.len() != mesh.len() {
        return Err(YamabeError::InvalidParameter(format!(
            "field has {} values, mesh has {} nodes",
            u.len(),
            mesh.len()
        )));
    }
    if let Some(node) = u.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
        return Err(YamabeError::InvalidField {
            node,
            value: u[node].as_f64(),
        });
    }
    let m1 = T::from_count(mesh.dim() - 1);
    let c: T = mesh.background().zeroth_order_term(mesh.dim());
    let beta = T::from_count(mesh.dim()) * T::lit(0.25) - T::lit(1.5);
    let lap = ops.laplacian(u);
    let grad = ops.gradient(u);
    Ok(RadialField::from_values(
        u.iter()
            .zip(lap.iter().zip(&grad))
            .map(|(&ui, (&l, &g))| {
                let q = g / ui;
                -m1 / ui * (c + l / ui + beta * q * q)
            })
            .collect(),
    ))
}

/// The same curvature through `U = u^η`:
/// `R = -(m-1) u^{-η-1} ((1/η) ΔU + c U)`.
pub fn scalar_curvature_eta_form<T: Real>(
    u: &[T],
    mesh: &RadialMesh<T>,
    ops: &RadialOperators<T>,
) -> Result<RadialField<T>> {
    RadialField::from_values(u.to_vec()).ensure_positive()?;
    let eta = mesh.eta();
    let m1 = T::from_count(mesh.dim() - 1);
    let c: T = mesh.background().zeroth_order_term(mesh.dim());
    let big_u: Vec<T> = u.iter().map(|&x| x.powf(eta)).collect();
    let lap = ops.laplacian(&big_u);
    Ok(RadialField::from_values(
        u.iter()
            .zip(big_u.iter().zip(&lap))
            .map(|(&ui, (&ue, &l))| -m1 * ui.powf(-eta - T::one()) * (l / eta + c * ue))
            .collect(),
    ))
}

/// Initial scalar curvature `R_{g0}` on the closed domain.
pub fn initial_scalar_curvature<T: Real>(u0: &RadialField<T>, mesh: &RadialMesh<T>) -> Result<RadialField<T>> {
    scalar_curvature(u0, mesh, &RadialOperators::new(mesh))
}

/// Constants extracted from the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataBounds<T> {
    /// `sup u0`.
    pub c0: T,
    /// `inf u0`.
    pub u0_min: T,
    /// `max(0, sup R_{g0})`.
    pub k0: T,
    /// `max_x max{|R_{g0}(x)|, m(m-1)/u0(x)}` over the closed ball.
    pub kappa: T,
    /// `ε` with `R_{g0} >= -1/ε`, capped.
    pub eps_floor: T,
    /// `inf R_{g0}`.
    pub r_min: T,
}

impl<T: Real> DataBounds<T> {
    /// Guaranteed existence horizon `1/K0`; infinite when `K0 = 0`.
    pub fn horizon(&self) -> T {
        if self.k0 > T::zero() {
            T::one() / self.k0
        } else {
            T::infinity()
        }
    }

    pub fn to_f64(&self) -> DataBounds<f64> {
        DataBounds {
            c0: self.c0.as_f64(),
            u0_min: self.u0_min.as_f64(),
            k0: self.k0.as_f64(),
            kappa: self.kappa.as_f64(),
            eps_floor: self.eps_floor.as_f64(),
            r_min: self.r_min.as_f64(),
        }
    }
}

pub fn data_bounds<T: Real>(u0: &RadialField<T>, rg0: &RadialField<T>, dim: usize) -> Result<DataBounds<T>> {
    data_bounds_with_cap(u0, rg0, dim, T::lit(EPS_FLOOR_CAP))
}

pub fn data_bounds_with_cap<T: Real>(
    u0: &RadialField<T>,
    rg0: &RadialField<T>,
    dim: usize,
    eps_cap: T,
) -> Result<DataBounds<T>> {
    if u0.len() != rg0.len() || u0.is_empty() {
        return Err(YamabeError::InvalidParameter(format!(
            "data bounds need fields of equal, nonzero length ({} vs {})",
            u0.len(),
            rg0.len()
        )));
    }
    u0.ensure_positive()?;
    let mm1 = T::from_count(dim * (dim - 1));
    let kappa = u0
        .iter()
        .zip(rg0.iter())
        .map(|(&u, &r)| r.abs().max(mm1 / u))
        .fold(T::zero(), T::max);
    let r_min = rg0.min();
    let eps = (T::one() / (-r_min).max(T::lit(1e-12))).min(eps_cap);
    Ok(DataBounds {
        c0: u0.max(),
        u0_min: u0.min(),
        k0: rg0.max().max(T::zero()),
        kappa,
        eps_floor: eps,
        r_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hyp(dim: usize, ell: f64, n: usize) -> RadialMesh<f64> {
        RadialMesh::new(BackgroundKind::Hyperbolic, dim, 0.0, ell, n).unwrap()
    }

    #[test]
    fn preset_values() {
        let mesh = hyp(3, 4.0, 40);
        let u = make_initial(&InitialPreset::Constant { c: 1.0 }, &mesh).unwrap();
        assert!(u.iter().all(|&x| x == 1.0));
        let flat = RadialMesh::new(BackgroundKind::Euclidean, 3, 0.0, 2.0, 20).unwrap();
        let s = make_initial(&InitialPreset::PuncturedSphere, &flat).unwrap();
        assert_eq!(s[10], 1.0);
        let ann = RadialMesh::new(BackgroundKind::Euclidean, 3, 1.0, 3.0, 20).unwrap();
        let p = make_initial(&InitialPreset::PowerLaw { b: 1.0 }, &ann).unwrap();
        assert_eq!(p[10], 1.0 / 16.0);
        let b = make_initial(&InitialPreset::FlatStatic { b: 4.0 }, &mesh).unwrap();
        assert_eq!(b[0], 1.0);
    }

    #[test]
    fn preset_errors() {
        let mesh = hyp(3, 4.0, 40);
        assert!(matches!(
            make_initial(&InitialPreset::PuncturedSphere, &mesh),
            Err(YamabeError::PresetMismatch { .. })
        ));
        assert!(make_initial(&InitialPreset::Constant { c: 0.0 }, &mesh).is_err());
        let bump = InitialPreset::Bump {
            base: 1.0,
            amplitude: -1.0,
            center: 2.0,
            width: 0.5,
        };
        assert!(make_initial(&bump, &mesh).is_err());
        let near = RadialMesh::new(BackgroundKind::Euclidean, 3, 0.05, 3.0, 20).unwrap();
        assert!(make_initial(&InitialPreset::PowerLaw { b: 1.0 }, &near).is_err());
        let flat = RadialMesh::new(BackgroundKind::Euclidean, 3, 0.0, 2.0, 20).unwrap();
        assert!(make_initial(&InitialPreset::FlatStatic { b: 1.0 }, &flat).is_err());
    }

    #[test]
    fn constant_curvature() {
        for dim in [3usize, 4, 6] {
            let mm1 = (dim * (dim - 1)) as f64;
            for c in [1.0, 0.3, 7.5] {
                let mesh = hyp(dim, 5.0, 100);
                let u = RadialField::constant(&mesh, c);
                let r = initial_scalar_curvature(&u, &mesh).unwrap();
                assert!(r.iter().all(|&x| (x + mm1 / c).abs() < 1e-10));
            }
        }
    }

    #[test]
    fn flat_static_curvature_second_order() {
        for dim in [3usize, 5] {
            let e = |n| {
                let mesh = hyp(dim, 5.0, n);
                let u = make_initial(&InitialPreset::FlatStatic { b: 1.0 }, &mesh).unwrap();
                let r = initial_scalar_curvature(&u, &mesh).unwrap();
                r.iter().fold(0.0_f64, |a, &x| a.max(x.abs()))
            };
            let (a, b) = (e(200), e(400));
            // |R| is largest at the rim where u is small; only the order matters here
            assert!((3.0..5.0).contains(&(a / b)), "m={dim} {a} {b}");
        }
    }

    #[test]
    fn sphere_curvature() {
        let e = |n| {
            let mesh = RadialMesh::new(BackgroundKind::Euclidean, 3, 0.0_f64, 3.0, n).unwrap();
            let u = make_initial(&InitialPreset::PuncturedSphere, &mesh).unwrap();
            let r = initial_scalar_curvature(&u, &mesh).unwrap();
            r.iter().fold(0.0_f64, |a, &x| a.max((x - 6.0).abs()))
        };
        let (a, b) = (e(300), e(600));
        assert!(a < 0.1 && (3.0..5.0).contains(&(a / b)), "{a} {b}");
    }

    #[test]
    fn two_forms_agree() {
        let bump = InitialPreset::Bump {
            base: 1.0,
            amplitude: 1.0,
            center: 2.0,
            width: 0.5,
        };
        let e = |n| {
            let mesh = hyp(4, 5.0, n);
            let ops = RadialOperators::new(&mesh);
            let u = make_initial(&bump, &mesh).unwrap();
            let a = scalar_curvature(&u, &mesh, &ops).unwrap();
            let b = scalar_curvature_eta_form(&u, &mesh, &ops).unwrap();
            a.sup_distance(&b)
        };
        let (a, b) = (e(400), e(800));
        assert!(a < 0.05 && a / b > 3.0, "{a} {b}");
    }

    #[test]
    fn bounds_examples() {
        let mesh = hyp(3, 2.0, 20);
        let one = RadialField::constant(&mesh, 1.0);
        let b = data_bounds(&one, &RadialField::constant(&mesh, -6.0), 3).unwrap();
        assert_eq!((b.kappa, b.k0, b.c0), (6.0, 0.0, 1.0));
        assert!(b.horizon().is_infinite());
        assert!((b.eps_floor - 1.0 / 6.0).abs() < 1e-16);
        let two = RadialField::constant(&mesh, 2.0);
        let b = data_bounds(&two, &RadialField::constant(&mesh, -3.0), 3).unwrap();
        assert_eq!(b.kappa, 3.0);
        let b = data_bounds(&two, &RadialField::constant(&mesh, 0.5), 3).unwrap();
        assert_eq!(b.eps_floor, EPS_FLOOR_CAP);
        assert_eq!(b.horizon(), 2.0);
    }

    #[test]
    fn single_precision_curvature() {
        let mesh = RadialMesh::new(BackgroundKind::Hyperbolic, 3, 0.0_f32, 3.0, 60).unwrap();
        let u = RadialField::constant(&mesh, 2.0_f32);
        let r = initial_scalar_curvature(&u, &mesh).unwrap();
        assert!(r.iter().all(|&x| (x + 3.0).abs() < 1e-4));
    }

    proptest! {
        #[test]
        fn presets_positive(base in 0.01_f64..5.0, amp in 0.01_f64..5.0, center in 0.0_f64..6.0, width in 0.1_f64..3.0) {
            let mesh = hyp(3, 6.0, 60);
            let u = make_initial(&InitialPreset::Bump { base, amplitude: amp, center, width }, &mesh).unwrap();
            prop_assert!(u.iter().all(|&x| x > 0.0 && x.is_finite()));
        }

        #[test]
        fn kappa_dominates_k0(base in 0.05_f64..3.0, amp in 0.05_f64..3.0, center in 0.0_f64..4.0, width in 0.3_f64..2.0) {
            let mesh = hyp(3, 5.0, 100);
            let u = make_initial(&InitialPreset::Bump { base, amplitude: amp, center, width }, &mesh).unwrap();
            let r = initial_scalar_curvature(&u, &mesh).unwrap();
            let b = data_bounds(&u, &r, 3).unwrap();
            prop_assert!(b.kappa >= b.k0 && b.k0 >= 0.0 && b.c0 > 0.0);
            prop_assert!(b.kappa * b.u0_min >= 6.0 - 1e-12);
        }
    }
}
