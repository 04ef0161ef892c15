//! Trajectory accuracy against ground truth.

mod dead_reckoning;
mod metrics;
mod report;

pub use dead_reckoning::imu_dead_reckoning;
pub use metrics::{ate, ate_with_tolerance, rpe, rpe_with_tolerance, AteResult, RpeResult, DEFAULT_TOLERANCE};
pub use report::{render_svg, report, AteSummary, Metrics, RpeSummary, TrackMetrics, METRICS_FILE, PLOT_FILE};
