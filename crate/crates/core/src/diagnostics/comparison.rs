use crate::error::{Result, YamabeError};
use crate::geometry::{coord_r_from_s, coord_s_from_r, BackgroundKind, RadialField, RadialMesh};
use crate::scalar::Real;
use crate::solver::FlowTrajectory;
use serde::{Deserialize, Serialize};

/// Largest ordering violation accepted between two compared flows.
pub const COMPARISON_TOLERANCE: f64 = 1e-10;

/// Area `|S^{m-1}|` of the unit sphere in `R^m`.
pub fn sphere_area<T: Real>(dim: usize) -> T {
    // |S^0| = 2, |S^1| = 2π, |S^k| = 2π |S^{k-2}| / (k-1)
    let two_pi = T::PI() + T::PI();
    let mut a = if dim % 2 == 1 { T::lit(2.0) } else { two_pi };
    let mut k = if dim % 2 == 1 { 0 } else { 1 };
    while k + 2 < dim {
        k += 2;
        a = a * two_pi / T::from_count(k - 1);
    }
    a
}

/// Cutoff in the log-polar coordinate: `0` up to `S`, `1` from `s0`, and the
/// quintic `10x³ - 15x⁴ + 6x⁵` in `x = (s-S)/(s0-S)` between.
pub fn cutoff<T: Real>(s: T, s_cut: T, s0: T) -> T {
    if s <= s_cut {
        T::zero()
    } else if s >= s0 {
        T::one()
    } else {
        let x = (s - s_cut) / (s0 - s_cut);
        x * x * x * (T::lit(10.0) + x * (T::lit(-15.0) + x * T::lit(6.0)))
    }
}

/// Integration window of the area-difference functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JWindow<T> {
    /// Inner end `S` of the cutoff ramp.
    pub s_cut: T,
    pub s0: T,
    /// Trapezoid intervals on each of `[S, s0]` and `[s0, s_max]`.
    pub points: usize,
}

impl<T: Real> Default for JWindow<T> {
    fn default() -> Self {
        let s0 = T::LN_2();
        Self {
            s_cut: s0 / T::lit(3.0),
            s0,
            points: 2000,
        }
    }
}

impl<T: Real> JWindow<T> {
    pub fn validate(&self) -> Result<()> {
        let slack = T::one() + T::lit(1e-12);
        if !(self.s_cut > T::zero()) || self.s_cut * T::lit(3.0) > self.s0 * slack {
            return Err(YamabeError::Config(format!(
                "cutoff start S = {} must satisfy 0 < S <= s0/3 with s0 = {}",
                self.s_cut, self.s0
            )));
        }
        if self.s0 > T::LN_2() * slack {
            return Err(YamabeError::Config(format!("s0 = {} exceeds ln 2", self.s0)));
        }
        if self.points < 2 {
            return Err(YamabeError::Config("J quadrature needs at least 2 intervals".into()));
        }
        Ok(())
    }

    /// Checks the window fits a mesh and returns `s_max`, the log-polar
    /// coordinate of the innermost positive radius.
    pub fn fit(&self, mesh: &RadialMesh<T>) -> Result<T> {
        self.validate()?;
        let reach = coord_r_from_s(self.s_cut)?;
        if reach > mesh.r_max() {
            return Err(YamabeError::Config(format!(
                "cutoff start S = {} reaches radius {reach}, beyond the domain radius {}",
                self.s_cut,
                mesh.r_max()
            )));
        }
        let inner = if mesh.has_origin() {
            mesh.nodes()[1]
        } else {
            mesh.r_min()
        };
        coord_s_from_r(inner)
    }
}

/// `U(s) = u(r(s)) / sinh² s`, with `u` interpolated linearly in `r`.
pub fn log_polar_view<'a, T: Real>(u: &'a RadialField<T>, mesh: &'a RadialMesh<T>) -> impl Fn(T) -> T + 'a {
    move |s: T| {
        let r = coord_r_from_s(s).unwrap_or(T::zero());
        let i = mesh.cell_of(r);
        let w = ((r - mesh.nodes()[i]) / mesh.dr()).max(T::zero()).min(T::one());
        let ur = u[i] * (T::one() - w) + u[i + 1] * w;
        let sh = s.sinh();
        ur / (sh * sh)
    }
}

/// `J = ∫ (V^{η+1} - U^{η+1})₊ φ dμ` over `s ∈ [S, s_max]`, with
/// `dμ = |S^{m-1}| ds` for rotationally symmetric integrands. `U` and `V`
/// are log-polar conformal factors.
pub fn area_difference_j<T: Real>(
    u: impl Fn(T) -> T,
    v: impl Fn(T) -> T,
    window: &JWindow<T>,
    s_max: T,
    eta: T,
    dim: usize,
) -> Result<T> {
    window.validate()?;
    if !(s_max > window.s_cut) {
        return Err(YamabeError::Config(format!(
            "s_max = {s_max} must exceed the cutoff start {}",
            window.s_cut
        )));
    }
    let p = eta + T::one();
    let integrand = |s: T| {
        let d = v(s).powf(p) - u(s).powf(p);
        d.max(T::zero()) * cutoff(s, window.s_cut, window.s0)
    };
    let trapezoid = |a: T, b: T| {
        if !(b > a) {
            return T::zero();
        }
        let n = window.points;
        let h = (b - a) / T::from_count(n);
        let mut acc = (integrand(a) + integrand(b)) * T::lit(0.5);
        for k in 1..n {
            acc = acc + integrand(a + h * T::from_count(k));
        }
        acc * h
    };
    let mid = window.s0.min(s_max);
    let total = trapezoid(window.s_cut, mid) + trapezoid(mid, s_max);
    Ok(total * sphere_area::<T>(dim))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JSample {
    pub t: f64,
    pub j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `max (ũ - u)₊` over nodes and times, `ũ` the flow expected below.
    pub ordering_violation: f64,
    pub worst_node: usize,
    pub worst_time: f64,
    pub initially_ordered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub tolerance: f64,
    pub j_series: Vec<JSample>,
    pub j_max: f64,
    pub s_cut: f64,
    pub s0: f64,
    pub s_max: f64,
    pub cutoff: String,
    pub pass: bool,
}

/// Compares a flow `above` (metric `g`) with a flow `below` (metric `g̃`)
/// started under it, on a shared mesh and time grid.
pub fn compare_flows<T: Real>(
    above: &FlowTrajectory<T>,
    below: &FlowTrajectory<T>,
    window: &JWindow<T>,
) -> Result<ComparisonReport> {
    if above.mesh != below.mesh {
        return Err(YamabeError::Config(
            "compared flows live on different meshes".into(),
        ));
    }
    if above.len() != below.len()
        || above
            .states
            .iter()
            .zip(&below.states)
            .any(|(a, b)| (a.t - b.t).abs() > T::lit(1e-12) * a.t.abs().max(T::one()))
    {
        return Err(YamabeError::Config(
            "compared flows have different time grids".into(),
        ));
    }
    let mesh = &above.mesh;
    let initially_ordered = below
        .first()
        .u
        .iter()
        .zip(above.first().u.iter())
        .all(|(v, u)| v <= u);
    let mut violation = 0.0_f64;
    let (mut worst_node, mut worst_time) = (0, 0.0);
    for (a, b) in above.states.iter().zip(&below.states) {
        for (i, (&u, &v)) in a.u.iter().zip(b.u.iter()).enumerate() {
            let d = (v - u).as_f64();
            if d > violation {
                violation = d;
                worst_node = i;
                worst_time = a.t.as_f64();
            }
        }
    }
    let hyperbolic = mesh.background() == BackgroundKind::Hyperbolic;
    let (j_series, s_max) = if hyperbolic {
        let s_max = window.fit(mesh)?;
        let eta = mesh.eta();
        let series = above
            .states
            .iter()
            .zip(&below.states)
            .map(|(a, b)| {
                let j = area_difference_j(
                    log_polar_view(&a.u, mesh),
                    log_polar_view(&b.u, mesh),
                    window,
                    s_max,
                    eta,
                    mesh.dim(),
                )?;
                Ok(JSample {
                    t: a.t.as_f64(),
                    j: j.as_f64(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        (series, s_max.as_f64())
    } else {
        (Vec::new(), f64::NAN)
    };
    let j_max = j_series.iter().map(|s| s.j).fold(0.0, f64::max);
    Ok(ComparisonReport {
        ordering_violation: violation,
        worst_node,
        worst_time,
        initially_ordered,
        label: (!initially_ordered).then(|| "unordered-initial".to_string()),
        tolerance: COMPARISON_TOLERANCE,
        j_series,
        j_max,
        s_cut: window.s_cut.as_f64(),
        s0: window.s0.as_f64(),
        s_max,
        cutoff: "quintic C2 bridge".to_string(),
        pass: violation <= COMPARISON_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary_data::{BoundaryData, BoundaryProfile};
    use crate::initial_data::{data_bounds, initial_scalar_curvature};
    use crate::solver::{solve, SolveConfig};
    use proptest::prelude::*;

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        assert!((sphere_area::<f64>(2) - 2.0 * pi).abs() < 1e-14);
        assert!((sphere_area::<f64>(3) - 4.0 * pi).abs() < 1e-14);
        assert!((sphere_area::<f64>(4) - 2.0 * pi * pi).abs() < 1e-13);
        assert!((sphere_area::<f64>(5) - 8.0 * pi * pi / 3.0).abs() < 1e-13);
    }

    #[test]
    fn cutoff_shape() {
        let (a, b) = (0.2_f64, 0.6);
        assert_eq!(cutoff(0.1, a, b), 0.0);
        assert_eq!(cutoff(0.7, a, b), 1.0);
        assert!((cutoff(0.4, a, b) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 0..=100 {
            let c = cutoff(a + (b - a) * k as f64 / 100.0, a, b);
            assert!(c >= prev && (0.0..=1.0).contains(&c));
            prev = c;
        }
    }

    #[test]
    fn window_limits() {
        let ok = JWindow::<f64>::default();
        assert!(ok.validate().is_ok());
        let wide = JWindow {
            s0: 0.8,
            ..ok
        };
        assert!(matches!(wide.validate(), Err(YamabeError::Config(_))));
        let late = JWindow {
            s_cut: 0.3,
            ..ok
        };
        assert!(late.validate().is_err());
        let small = RadialMesh::new(BackgroundKind::Hyperbolic, 3, 0.0, 2.0, 100).unwrap();
        assert!(ok.fit(&small).is_err());
    }

    #[test]
    fn constant_difference_closed_form() {
        // V^{η+1} - U^{η+1} = K on the whole window
        let w = JWindow::<f64>::default();
        let (eta, dim, s_max) = (0.25, 3, 5.0);
        let (u, v) = (1.0_f64, 1.5_f64);
        let k = v.powf(1.25) - u.powf(1.25);
        let j = area_difference_j(|_| u, |_| v, &w, s_max, eta, dim).unwrap();
        let exact = 4.0 * std::f64::consts::PI * k * ((w.s0 - w.s_cut) / 2.0 + s_max - w.s0);
        assert!((j - exact).abs() < 1e-10, "{j} {exact}");
        assert_eq!(area_difference_j(|_| v, |_| u, &w, s_max, eta, dim).unwrap(), 0.0);
    }

    #[test]
    fn brute_force_quadrature() {
        let w = JWindow::<f64>::default();
        let u = |s: f64| 1.0 + 0.3 * s.sin();
        let v = |s: f64| 1.2 + 0.1 * s;
        let j = area_difference_j(u, v, &w, 4.0, 0.5, 4).unwrap();
        let fine = JWindow { points: 200_000, ..w };
        let reference = area_difference_j(u, v, &fine, 4.0, 0.5, 4).unwrap();
        assert!((j - reference).abs() < 1e-6 * reference);
    }

    fn constant_run(c: f64) -> FlowTrajectory<f64> {
        let mesh = RadialMesh::new(BackgroundKind::Hyperbolic, 3, 0.0, 3.0, 150).unwrap();
        let u0 = RadialField::constant(&mesh, c);
        let r = initial_scalar_curvature(&u0, &mesh).unwrap();
        let b = data_bounds(&u0, &r, 3).unwrap();
        let p = BoundaryProfile::from_initial(&u0, &r, &b, 3).unwrap();
        solve(&u0, &mesh, BoundaryData::profile(p), &SolveConfig::new(1e-2, 0.3)).unwrap()
    }

    #[test]
    fn constant_pair() {
        let (hi, lo) = (constant_run(1.0), constant_run(0.8));
        let rep = compare_flows(&hi, &lo, &JWindow::default()).unwrap();
        assert!(rep.initially_ordered && rep.pass);
        assert!(rep.ordering_violation < 1e-12);
        assert!(rep.j_series.iter().all(|s| s.j == 0.0));
        for (a, b) in hi.states.iter().zip(&lo.states) {
            assert!(a.u.iter().zip(b.u.iter()).all(|(x, y)| (x - y - 0.2).abs() < 1e-12));
        }
        let rev = compare_flows(&lo, &hi, &JWindow::default()).unwrap();
        assert_eq!(rev.label.as_deref(), Some("unordered-initial"));
        assert!((rev.ordering_violation - 0.2).abs() < 1e-12 && !rev.pass);
        assert!(rev.j_max > 0.0);
    }

    #[test]
    fn reflexive() {
        let a = constant_run(1.0);
        let rep = compare_flows(&a, &a, &JWindow::default()).unwrap();
        assert_eq!(rep.ordering_violation, 0.0);
        assert_eq!(rep.j_max, 0.0);
    }

    #[test]
    fn mismatched_grids() {
        let a = constant_run(1.0);
        let mut b = a.clone();
        b.states.pop();
        assert!(matches!(compare_flows(&a, &b, &JWindow::default()), Err(YamabeError::Config(_))));
    }

    proptest! {
        #[test]
        fn j_monotone_in_upper_field(base in 0.5_f64..2.0, lift1 in 0.0_f64..1.0, lift2 in 0.0_f64..1.0) {
            let w = JWindow::<f64> { points: 200, ..JWindow::default() };
            let u = |s: f64| base + 0.2 * (3.0 * s).cos();
            let (lo, hi) = if lift1 <= lift2 { (lift1, lift2) } else { (lift2, lift1) };
            let j1 = area_difference_j(u, |s| base + lo * s, &w, 3.0, 0.25, 3).unwrap();
            let j2 = area_difference_j(u, |s| base + hi * s, &w, 3.0, 0.25, 3).unwrap();
            prop_assert!(j1 >= 0.0 && j1 <= j2 + 1e-15);
        }
    }
}
