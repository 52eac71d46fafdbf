//! Checks of the flow against the barriers, curvature bounds, comparison
//! and length statements it must satisfy.

mod barriers;
mod comparison;
mod completeness;
mod gradient;

pub use barriers::{
    check_barriers, check_barriers_with, reported_eps, BarrierCheck, BarrierOptions, BarrierReport, CheckStatus,
};
pub use comparison::{
    area_difference_j, compare_flows, cutoff, log_polar_view, sphere_area, ComparisonReport, JWindow,
    COMPARISON_TOLERANCE,
};
pub use completeness::{
    completeness_scan, radial_lengths, CompletenessReport, LengthEntry, ScanConfig, VerdictTrend,
};
pub use gradient::gradient_quantity_sup;

/// Slack below which a barrier counts as violated.
pub const BARRIER_TOLERANCE: f64 = 1e-8;
