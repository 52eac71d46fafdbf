use crate::boundary_data::{BoundaryData, BoundaryProfile};
use crate::error::{Result, YamabeError};
use crate::geometry::{radial_length, BackgroundKind, RadialMesh};
use crate::initial_data::{data_bounds, initial_scalar_curvature, make_initial, InitialPreset};
use crate::scalar::Real;
use crate::solver::{solve, FlowTrajectory, SolveConfig};
use serde::{Deserialize, Serialize};
use std::thread;

/// `(t, length from r_from to the rim)` for every stored state.
pub fn radial_lengths<T: Real>(traj: &FlowTrajectory<T>, r_from: T) -> Result<Vec<(T, T)>> {
    traj.states
        .iter()
        .map(|s| Ok((s.t, radial_length(&s.u, &traj.mesh, r_from, traj.mesh.r_max())?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictTrend {
    DivergingWithDomain,
    UniformlyBounded,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthEntry {
    pub domain: f64,
    pub t: f64,
    pub length: f64,
    /// Lower threshold over hyperbolic space, upper threshold over flat space.
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub background: BackgroundKind,
    pub base_radius: f64,
    pub lengths: Vec<LengthEntry>,
    /// Largest spread of lengths across domain sizes at a common time.
    pub domain_spread: f64,
    /// Flat-space scale `b` with `u0 <= b r^{-4}` on the sampled range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_bound: Option<f64>,
    pub rule: String,
    pub verdict_trend: VerdictTrend,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig<T> {
    pub dim: usize,
    /// Mesh spacing shared by all domain sizes.
    pub dr: T,
    pub dt: T,
    /// Radius the lengths are measured from.
    pub base_radius: T,
    /// Inner radius of flat annuli.
    pub r_min: T,
    /// Allowance above `√b (1/base - 1/R)` over flat space.
    pub upper_slack: T,
    /// Allowance below `√(m(m-1)t) (R - base)` over hyperbolic space.
    pub lower_slack: T,
    /// Largest spread across domain sizes still counted as bounded.
    pub stability: T,
}

impl<T: Real> ScanConfig<T> {
    pub fn new(dim: usize, dr: T, dt: T) -> Self {
        Self {
            dim,
            dr,
            dt,
            base_radius: T::one(),
            r_min: T::one(),
            upper_slack: T::lit(1e-2),
            lower_slack: T::lit(1e-3),
            stability: T::lit(1e-2),
        }
    }
}

fn run_domain<T: Real>(preset: &InitialPreset<T>, domain: T, t_final: T, cfg: &ScanConfig<T>) -> Result<FlowTrajectory<T>> {
    let bg = preset.required_background().unwrap_or(BackgroundKind::Hyperbolic);
    let r0 = match bg {
        BackgroundKind::Hyperbolic => T::zero(),
        BackgroundKind::Euclidean => cfg.r_min,
    };
    let mesh = RadialMesh::with_spacing(bg, cfg.dim, r0, domain, cfg.dr)?;
    let u0 = make_initial(preset, &mesh)?;
    let rim = u0[mesh.len() - 1];
    let boundary = match bg {
        BackgroundKind::Hyperbolic => {
            let r = initial_scalar_curvature(&u0, &mesh)?;
            let b = data_bounds(&u0, &r, cfg.dim)?;
            BoundaryData::profile(BoundaryProfile::from_initial(&u0, &r, &b, cfg.dim)?)
        }
        BackgroundKind::Euclidean => BoundaryData::Frozen { value: rim },
    };
    let config = SolveConfig::new(cfg.dt.min(t_final), t_final);
    solve(&u0, &mesh, boundary, &config)
}

/// Radial lengths from `base_radius` to the rim for each domain size and
/// sample time. Over hyperbolic space every length must exceed
/// `√(m(m-1)t)(R - base)`, so lengths grow with the domain; over flat space
/// with `u0 <= b r^{-4}` they stay below `√b (1/base - 1/R)` and settle as
/// `R` grows. Domain sizes are solved concurrently.
pub fn completeness_scan<T: Real>(
    preset: &InitialPreset<T>,
    domains: &[T],
    t_samples: &[T],
    cfg: &ScanConfig<T>,
) -> Result<CompletenessReport> {
    if domains.is_empty() || domains.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(YamabeError::InvalidParameter(
            "domain sizes must be non-empty and strictly increasing".into(),
        ));
    }
    if t_samples.is_empty() || t_samples.iter().any(|&t| !(t >= T::zero())) {
        return Err(YamabeError::InvalidParameter(
            "sample times must be non-empty and nonnegative".into(),
        ));
    }
    if domains[0] <= cfg.base_radius {
        return Err(YamabeError::InvalidParameter(format!(
            "every domain must extend past the base radius {}",
            cfg.base_radius
        )));
    }
    let bg = preset.required_background().unwrap_or(BackgroundKind::Hyperbolic);
    let t_final = t_samples.iter().copied().fold(T::zero(), T::max);
    let runs: Vec<Result<Vec<(T, T)>>> = thread::scope(|scope| {
        let handles: Vec<_> = domains
            .iter()
            .map(|&domain| {
                scope.spawn(move || -> Result<Vec<(T, T)>> {
                    if t_final > T::zero() {
                        let traj = run_domain(preset, domain, t_final, cfg)?;
                        t_samples
                            .iter()
                            .map(|&t| {
                                let s = &traj.states[traj.index_near(t)];
                                Ok((s.t, radial_length(&s.u, &traj.mesh, cfg.base_radius, domain)?))
                            })
                            .collect()
                    } else {
                        let r0 = if bg == BackgroundKind::Euclidean { cfg.r_min } else { T::zero() };
                        let mesh = RadialMesh::with_spacing(bg, cfg.dim, r0, domain, cfg.dr)?;
                        let u0 = make_initial(preset, &mesh)?;
                        let l = radial_length(&u0, &mesh, cfg.base_radius, domain)?;
                        Ok(t_samples.iter().map(|_| (T::zero(), l)).collect())
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("length scan worker panicked"))
            .collect()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mm1 = T::from_count(cfg.dim * (cfg.dim - 1));
    let power_bound = match bg {
        BackgroundKind::Euclidean => {
            let last = domains[domains.len() - 1];
            let mesh = RadialMesh::with_spacing(bg, cfg.dim, cfg.r_min, last, cfg.dr)?;
            let u0 = make_initial(preset, &mesh)?;
            Some(
                mesh.nodes()
                    .iter()
                    .zip(u0.iter())
                    .filter(|(&r, _)| r >= cfg.base_radius)
                    .map(|(&r, &u)| u * r.powi(4))
                    .fold(T::zero(), T::max),
            )
        }
        BackgroundKind::Hyperbolic => None,
    };
    let mut lengths = Vec::new();
    for (&domain, samples) in domains.iter().zip(&runs) {
        for &(t, length) in samples {
            let (threshold, pass) = match power_bound {
                Some(b) => {
                    let cap = b.sqrt() * (T::one() / cfg.base_radius - T::one() / domain) + cfg.upper_slack;
                    (cap, length <= cap)
                }
                None => {
                    let floor = (mm1 * t).sqrt() * (domain - cfg.base_radius) - cfg.lower_slack;
                    (floor, length >= floor)
                }
            };
            lengths.push(LengthEntry {
                domain: domain.as_f64(),
                t: t.as_f64(),
                length: length.as_f64(),
                threshold: threshold.as_f64(),
                pass,
            });
        }
    }
    let mut spread = 0.0_f64;
    let mut increasing = true;
    for k in 0..t_samples.len() {
        let column: Vec<f64> = runs.iter().map(|r| r[k].1.as_f64()).collect();
        let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
        spread = spread.max(hi - lo);
        increasing &= column.windows(2).all(|w| w[1] > w[0]);
    }
    let all_pass = lengths.iter().all(|e| e.pass);
    let (verdict, rule) = match power_bound {
        Some(b) => (
            if all_pass && spread < cfg.stability.as_f64() {
                VerdictTrend::UniformlyBounded
            } else {
                VerdictTrend::Inconclusive
            },
            format!(
                "length <= sqrt(b)(1/{base} - 1/R) + {slack} with b = {b}, spread across R < {stab}",
                base = cfg.base_radius,
                slack = cfg.upper_slack,
                stab = cfg.stability
            ),
        ),
        None => (
            if all_pass && increasing {
                VerdictTrend::DivergingWithDomain
            } else {
                VerdictTrend::Inconclusive
            },
            format!(
                "length >= sqrt(m(m-1)t)(R - {base}) - {slack}, increasing in R",
                base = cfg.base_radius,
                slack = cfg.lower_slack
            ),
        ),
    };
    Ok(CompletenessReport {
        background: bg,
        base_radius: cfg.base_radius.as_f64(),
        lengths,
        domain_spread: spread,
        power_bound: power_bound.map(|b| b.as_f64()),
        rule,
        verdict_trend: verdict,
    })
}
