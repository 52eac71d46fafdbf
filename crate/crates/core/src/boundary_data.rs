//! Dirichlet data on the rim of the ball: the ramp `ψ`, the profile
//! `φ(t) = u0 + m(m-1)t + v ψ(κt)/κ`, and the inequalities it satisfies.

use crate::error::{Result, YamabeError};
use crate::geometry::RadialField;
use crate::initial_data::DataBounds;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Slack below which a profile inequality counts as violated.
pub const PROFILE_TOLERANCE: f64 = 1e-12;

fn ramp<T: Real>(s: T) -> T {
    let third = T::one() / T::lit(3.0);
    if s < T::one() {
        let d = s - T::one();
        third + third * d * d * d
    } else {
        third
    }
}

fn ramp_prime<T: Real>(s: T) -> T {
    if s < T::one() {
        let d = s - T::one();
        d * d
    } else {
        T::zero()
    }
}

/// `ψ(s) = 1/3 + (s-1)³/3` on `[0, 1]`, `1/3` beyond.
pub fn psi<T: Real>(s: T) -> Result<T> {
    if !(s >= T::zero()) {
        return Err(YamabeError::Domain(format!("psi needs s >= 0, got {s}")));
    }
    Ok(ramp(s))
}

/// `ψ'(s) = (s-1)²` on `[0, 1]`, `0` beyond.
pub fn psi_prime<T: Real>(s: T) -> Result<T> {
    if !(s >= T::zero()) {
        return Err(YamabeError::Domain(format!("psi' needs s >= 0, got {s}")));
    }
    Ok(ramp_prime(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile<T> {
    pub u0_boundary: T,
    /// `v = -u0 R_{g0} - m(m-1)` at the rim.
    pub v_boundary: T,
    pub kappa: T,
    pub dim: usize,
}

impl<T: Real> BoundaryProfile<T> {
    /// Profile from the rim values of `u0` and `R_{g0}` and the ball's `κ`.
    pub fn new(u0_boundary: T, r_boundary: T, kappa: T, dim: usize) -> Result<Self> {
        if !(u0_boundary > T::zero()) || !u0_boundary.is_finite() {
            return Err(YamabeError::InvalidParameter(format!(
                "boundary value of u0 must be positive, got {u0_boundary}"
            )));
        }
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(YamabeError::InvalidParameter(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        let mm1 = T::from_count(dim * (dim - 1));
        let v = -u0_boundary * r_boundary - mm1;
        let cap = T::lit(2.0) * u0_boundary * kappa;
        if v.abs() > cap * (T::one() + T::lit(1e-12)) {
            return Err(YamabeError::InvalidParameter(format!(
                "|v| = {} exceeds 2 u0 kappa = {cap}; kappa does not dominate the rim curvature",
                v.abs()
            )));
        }
        Ok(Self {
            u0_boundary,
            v_boundary: v,
            kappa,
            dim,
        })
    }

    /// Profile at the outer node of a field pair, with `κ` from the bounds.
    pub fn from_initial(u0: &RadialField<T>, rg0: &RadialField<T>, bounds: &DataBounds<T>, dim: usize) -> Result<Self> {
        let last = u0.len().checked_sub(1).ok_or_else(|| {
            YamabeError::InvalidParameter("empty initial field".to_string())
        })?;
        Self::new(u0[last], rg0[last], bounds.kappa, dim)
    }

    fn mm1(&self) -> T {
        T::from_count(self.dim * (self.dim - 1))
    }

    pub fn phi(&self, t: T) -> T {
        self.u0_boundary + self.mm1() * t + self.v_boundary * ramp(self.kappa * t) / self.kappa
    }

    /// `φ'(t) = m(m-1) + v ψ'(κt)`, evaluated analytically.
    pub fn phi_prime(&self, t: T) -> T {
        self.mm1() + self.v_boundary * ramp_prime(self.kappa * t)
    }

    /// Rim curvature `-φ'/φ`.
    pub fn boundary_curvature(&self, t: T) -> Result<T> {
        let phi = self.phi(t);
        if !(phi > T::zero()) {
            return Err(YamabeError::Domain(format!(
                "boundary profile is not positive at t = {t}: {phi}"
            )));
        }
        Ok(-self.phi_prime(t) / phi)
    }

    /// Largest `ε` with `-φ'/φ >= -1/(t+ε)` for every `t >= 0`, from a scan
    /// of `[0, 1/κ]` with `samples` points. Beyond `1/κ` the constraint
    /// `ε <= φ/φ' - t` is constant, so the scan covers all times.
    pub fn largest_admissible_eps(&self, samples: usize) -> T {
        let end = T::one() / self.kappa;
        let n = samples.max(2);
        (0..=n)
            .map(|k| end * T::from_count(k) / T::from_count(n))
            .filter_map(|t| {
                let d = self.phi_prime(t);
                (d > T::zero()).then(|| self.phi(t) / d - t)
            })
            .fold(T::infinity(), T::min)
    }
}

/// `K0/(1 - K0 t)`, read as `0` when `K0 = 0`.
pub fn upper_curvature_bound<T: Real>(k0: T, t: T) -> T {
    if k0 > T::zero() {
        k0 / (T::one() - k0 * t)
    } else {
        T::zero()
    }
}

/// `-1/(t + ε)`.
pub fn lower_curvature_bound<T: Real>(eps: T, t: T) -> T {
    -T::one() / (t + eps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheck {
    pub name: String,
    pub worst_slack: f64,
    pub worst_time: f64,
    pub pass: bool,
    /// Times skipped because the bound does not apply there.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub tolerance: f64,
    pub checks: Vec<ProfileCheck>,
    pub pass: bool,
}

impl ProfileReport {
    pub fn check(&self, name: &str) -> Option<&ProfileCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Slack of the four profile inequalities over a time grid: the two sides of
/// `u0/3 + m(m-1)t <= φ <= 5u0/3 + m(m-1)t` and of
/// `-1/(t+ε) <= -φ'/φ <= K0/(1-K0t)`. The upper curvature side is only
/// evaluated for `t < 1/K0`.
pub fn check_profile_bounds<T: Real>(profile: &BoundaryProfile<T>, k0: T, eps: T, t_grid: &[T]) -> ProfileReport {
    let names = ["phi_lower", "phi_upper", "curvature_lower", "curvature_upper"];
    let mut worst = [(f64::INFINITY, f64::NAN); 4];
    let mut skipped = [0usize; 4];
    let third = profile.u0_boundary / T::lit(3.0);
    let mm1 = profile.mm1();
    for &t in t_grid {
        let phi = profile.phi(t);
        let big_bang = mm1 * t;
        let mut slack = [T::nan(); 4];
        slack[0] = phi - (third + big_bang);
        slack[1] = T::lit(5.0) * third + big_bang - phi;
        match profile.boundary_curvature(t) {
            Ok(r) => {
                slack[2] = r - lower_curvature_bound(eps, t);
                if k0 > T::zero() && k0 * t >= T::one() {
                    skipped[3] += 1;
                } else {
                    slack[3] = upper_curvature_bound(k0, t) - r;
                }
            }
            Err(_) => {
                slack[2] = T::neg_infinity();
                slack[3] = T::neg_infinity();
            }
        }
        for k in 0..4 {
            let s = slack[k].as_f64();
            if !s.is_nan() && s < worst[k].0 {
                worst[k] = (s, t.as_f64());
            }
        }
    }
    let checks: Vec<ProfileCheck> = names
        .iter()
        .enumerate()
        .map(|(k, name)| ProfileCheck {
            name: name.to_string(),
            worst_slack: worst[k].0,
            worst_time: worst[k].1,
            pass: worst[k].0 >= -PROFILE_TOLERANCE,
            skipped: skipped[k],
        })
        .collect();
    ProfileReport {
        tolerance: PROFILE_TOLERANCE,
        pass: checks.iter().all(|c| c.pass),
        checks,
    }
}

/// One segment of piecewise boundary data: `profile` shifted to start at
/// `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileLeg<T> {
    pub start: T,
    pub profile: BoundaryProfile<T>,
}

/// Dirichlet data at the outer rim of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryData<T> {
    /// The constructed profile, restarted at each leg's start time.
    Profile { legs: Vec<ProfileLeg<T>> },
    /// Value held fixed, used for static solutions and flat annuli.
    Frozen { value: T },
}

impl<T: Real> BoundaryData<T> {
    pub fn profile(profile: BoundaryProfile<T>) -> Self {
        BoundaryData::Profile {
            legs: vec![ProfileLeg {
                start: T::zero(),
                profile,
            }],
        }
    }

    fn leg(&self, t: T) -> Option<&ProfileLeg<T>> {
        match self {
            BoundaryData::Profile { legs } => legs
                .iter()
                .rev()
                .find(|l| l.start <= t)
                .or_else(|| legs.first()),
            BoundaryData::Frozen { .. } => None,
        }
    }

    pub fn value(&self, t: T) -> T {
        match self {
            BoundaryData::Frozen { value } => *value,
            BoundaryData::Profile { .. } => {
                let leg = self.leg(t).expect("profile data has a leg");
                leg.profile.phi(t - leg.start)
            }
        }
    }

    /// Exact rim curvature when the data comes from a profile.
    pub fn curvature(&self, t: T) -> Option<T> {
        self.leg(t)
            .and_then(|leg| leg.profile.boundary_curvature(t - leg.start).ok())
    }

    /// Appends a leg starting at `start`; later legs take over from then on.
    pub fn push_leg(&mut self, start: T, profile: BoundaryProfile<T>) -> Result<()> {
        match self {
            BoundaryData::Profile { legs } => {
                if legs.last().is_some_and(|l| l.start >= start) {
                    return Err(YamabeError::InvalidParameter(format!(
                        "profile legs must start in increasing order, got {start}"
                    )));
                }
                legs.push(ProfileLeg { start, profile });
                Ok(())
            }
            BoundaryData::Frozen { .. } => Err(YamabeError::InvalidParameter(
                "cannot append a profile leg to frozen boundary data".to_string(),
            )),
        }
    }
}
