use std::time::Duration;

use serde::Serialize;

/// Run summary. `processed + dropped` equals the number of frames offered.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PipelineStats {
    pub offered: usize,
    pub processed: usize,
    pub dropped: usize,
    pub wall_time_s: f64,
    pub fps: f64,
    pub latency_ingest_mean_s: f64,
    pub latency_ingest_p95_s: f64,
    pub latency_imaging_mean_s: f64,
    pub latency_imaging_p95_s: f64,
    pub latency_inference_mean_s: f64,
    pub latency_inference_p95_s: f64,
    pub latency_uplink_mean_s: f64,
    pub latency_uplink_p95_s: f64,
    /// Mean time from radar arrival to pose emission.
    pub latency_end_to_end_mean_s: f64,
    pub max_queue_occupancy: usize,
    pub queue_capacity: usize,
}

impl PipelineStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize") + "\n"
    }
}

/// `(mean, p95)` in seconds; zeros for an empty set.
pub(crate) fn summarize(samples: &[Duration]) -> (f64, f64) {
    if samples.is_empty() {
        return (0.0, 0.0);
    }
    let mut s: Vec<f64> = samples.iter().map(Duration::as_secs_f64).collect();
    s.sort_by(f64::total_cmp);
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let rank = ((0.95 * s.len() as f64).ceil() as usize).clamp(1, s.len());
    (mean, s[rank - 1])
}
