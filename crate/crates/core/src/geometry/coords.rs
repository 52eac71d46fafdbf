use crate::error::{Result, YamabeError};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// `-ln tanh(x/2) = 2 artanh(e^{-x})`, which is its own inverse.
///
/// Small `e^{-x}` goes through `artanh` directly; otherwise the ratio
/// `(1 + e^{-x}) / (1 - e^{-x})` is built from `expm1` so the cancellation in
/// `1 - e^{-x}` near `x = 0` does not cost digits.
fn log_coth_half<T: Real>(x: T) -> T {
    let q = (-x).exp();
    if q < T::lit(0.5) {
        T::lit(2.0) * q.atanh()
    } else {
        let em = (-x).exp_m1();
        ((T::lit(2.0) + em) / (-em)).ln()
    }
}

/// Logarithmic polar coordinate `s = -ln tanh(r/2)` of a geodesic radius.
pub fn coord_s_from_r<T: Real>(r: T) -> Result<T> {
    if !(r > T::zero()) {
        return Err(YamabeError::Domain(format!(
            "log-polar coordinate needs r > 0, got {r}"
        )));
    }
    Ok(log_coth_half(r))
}

/// Geodesic radius of a log-polar coordinate; `s = +inf` maps to `r = 0`.
pub fn coord_r_from_s<T: Real>(s: T) -> Result<T> {
    if !(s > T::zero()) {
        return Err(YamabeError::Domain(format!(
            "log-polar coordinate must be positive, got {s}"
        )));
    }
    if s.is_infinite() {
        return Ok(T::zero());
    }
    Ok(log_coth_half(s))
}

/// Poincaré-ball radius `tanh(r/2)`.
pub fn poincare_radius<T: Real>(r: T) -> T {
    (r * T::lit(0.5)).tanh()
}

/// `b h^{-2}` with `h = 2/(1 - rho²)`: the factor `f` with `f g_H = b g_E`.
pub fn flat_conformal_factor<T: Real>(r: T, b: T) -> Result<T> {
    if !(r >= T::zero()) {
        return Err(YamabeError::Domain(format!("radius must be >= 0, got {r}")));
    }
    if !(b > T::zero()) {
        return Err(YamabeError::InvalidParameter(format!(
            "flat scale b must be positive, got {b}"
        )));
    }
    let c = (r * T::lit(0.5)).cosh();
    Ok(b / (T::lit(4.0) * (c * c) * (c * c)))
}

/// The same factor written in the log-polar coordinate: `b (e^{-s} sinh s)²`.
pub fn flat_conformal_factor_log_polar<T: Real>(s: T, b: T) -> Result<T> {
    if !(s > T::zero()) {
        return Err(YamabeError::Domain(format!(
            "log-polar coordinate must be positive, got {s}"
        )));
    }
    if !(b > T::zero()) {
        return Err(YamabeError::InvalidParameter(format!(
            "flat scale b must be positive, got {b}"
        )));
    }
    if s.is_infinite() {
        return Ok(b * T::lit(0.25));
    }
    // e^{-s} sinh s = (1 - e^{-2s}) / 2
    let w = -(-(s + s)).exp_m1() * T::lit(0.5);
    Ok(b * w * w)
}

/// A radius with its derived Poincaré and log-polar views.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialCoordinate<T> {
    pub r: T,
}

impl<T: Real> RadialCoordinate<T> {
    pub fn new(r: T) -> Result<Self> {
        if !(r >= T::zero()) || !r.is_finite() {
            return Err(YamabeError::Domain(format!("radius must be finite and >= 0, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn from_s(s: T) -> Result<Self> {
        Ok(Self { r: coord_r_from_s(s)? })
    }

    pub fn rho(&self) -> T {
        poincare_radius(self.r)
    }

    /// `+inf` at the origin.
    pub fn s(&self) -> T {
        if self.r == T::zero() {
            T::infinity()
        } else {
            log_coth_half(self.r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn s_at_one() {
        // mpmath: -log(tanh(1/2)) = 0.771936832905304725...
        let s = coord_s_from_r(1.0_f64).unwrap();
        assert!((s - 0.771_936_832_905_304_7).abs() < 1e-15);
    }

    #[test]
    fn s_equals_one() {
        let r = 2.0 * (-1.0_f64).exp().atanh();
        assert!((coord_s_from_r(r).unwrap() - 1.0).abs() < 1e-15);
        assert!((coord_r_from_s(1.0).unwrap() - r).abs() < 1e-15);
    }

    #[test]
    fn limits_and_errors() {
        assert!(coord_s_from_r(1e-300_f64).unwrap() > 600.0);
        assert!(coord_s_from_r(0.0_f64).is_err());
        assert!(coord_s_from_r(-1.0_f64).is_err());
        assert_eq!(coord_r_from_s(f64::INFINITY).unwrap(), 0.0);
        assert!(RadialCoordinate::new(0.0_f64).unwrap().s().is_infinite());
    }

    #[test]
    fn flat_factor_values() {
        assert_eq!(flat_conformal_factor(0.0_f64, 1.0).unwrap(), 0.25);
        assert_eq!(flat_conformal_factor(0.0_f64, 4.0).unwrap(), 1.0);
        // mpmath: 1/(4 cosh(1)^4) = 0.0440946119035336673...
        let f = flat_conformal_factor(2.0_f64, 1.0).unwrap();
        assert!((f - 0.044_094_611_903_533_67).abs() < 1e-16);
        assert!(flat_conformal_factor(1.0_f64, 0.0).is_err());
    }

    #[test]
    fn rho_in_unit_interval() {
        let c = RadialCoordinate::new(3.0_f64).unwrap();
        assert!((c.rho() - 1.5_f64.tanh()).abs() < 1e-16);
        // rho = e^{-s}
        assert!((c.rho() - (-c.s()).exp()).abs() < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let s = coord_s_from_r(1.0_f32).unwrap();
        assert!((s - 0.771_936_8).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn round_trip(r in 1e-6_f64..30.0) {
            let back = coord_r_from_s(coord_s_from_r(r).unwrap()).unwrap();
            prop_assert!((back - r).abs() < 1e-12);
        }

        #[test]
        fn s_strictly_decreasing(r in 1e-6_f64..30.0, dr in 1e-3_f64..1.0) {
            prop_assert!(coord_s_from_r(r + dr).unwrap() < coord_s_from_r(r).unwrap());
            prop_assert!(poincare_radius(r + dr) > poincare_radius(r));
        }

        #[test]
        fn flat_factor_two_routes(r in 1e-6_f64..30.0, b in 0.1_f64..10.0) {
            let a = flat_conformal_factor(r, b).unwrap();
            let s = coord_s_from_r(r).unwrap();
            let c = flat_conformal_factor_log_polar(s, b).unwrap();
            prop_assert!((a - c).abs() <= 1e-12 * a.abs());
        }
    }
}
