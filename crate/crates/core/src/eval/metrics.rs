//! Absolute and relative trajectory error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::se3::{PoseSE3, Trajectory};

/// Half of a 100 Hz IMU period.
pub const DEFAULT_TOLERANCE: f64 = 0.005;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AteResult {
    pub rmse: f64,
    pub mean: f64,
    pub max: f64,
    /// Translational error per associated estimate after the anchor.
    pub errors: Vec<f64>,
    /// Estimates with no truth pose within tolerance.
    pub unmatched: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpeResult {
    pub delta: usize,
    pub trans_mean: f64,
    pub trans_rmse: f64,
    pub trans_max: f64,
    pub rot_mean: f64,
    pub rot_rmse: f64,
    pub rot_max: f64,
    pub trans_errors: Vec<f64>,
    pub rot_errors: Vec<f64>,
}

/// `(estimate, truth)` pose pairs matched by nearest timestamp.
fn associate(est: &Trajectory, truth: &Trajectory, tolerance: f64) -> Result<(Vec<(PoseSE3, PoseSE3)>, usize)> {
    if est.is_empty() || truth.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut pairs = Vec::with_capacity(est.len());
    let mut unmatched = 0;
    for (t, pose) in est.entries() {
        match truth.pose_near(*t, tolerance) {
            Some(tp) => pairs.push((*pose, *tp)),
            None => unmatched += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoTemporalOverlap);
    }
    Ok((pairs, unmatched))
}

fn stats(v: &[f64]) -> (f64, f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let rmse = (v.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let max = v.iter().copied().fold(0.0, f64::max);
    (rmse, mean, max)
}

/// Absolute trajectory error with start-pose alignment: both trajectories
/// are re-expressed relative to their first associated pose, which is then
/// excluded from the statistics. A single associated pose scores zero.
pub fn ate(est: &Trajectory, truth: &Trajectory) -> Result<AteResult> {
    ate_with_tolerance(est, truth, DEFAULT_TOLERANCE)
}

pub fn ate_with_tolerance(est: &Trajectory, truth: &Trajectory, tolerance: f64) -> Result<AteResult> {
    let (pairs, unmatched) = associate(est, truth, tolerance)?;
    let (e0, t0) = pairs[0];
    let errors: Vec<f64> = if pairs.len() == 1 {
        vec![0.0]
    } else {
        pairs[1..]
            .iter()
            .map(|(e, t)| (e0.relative_to(e).translation() - t0.relative_to(t).translation()).norm())
            .collect()
    };
    let (rmse, mean, max) = stats(&errors);
    Ok(AteResult {
        rmse,
        mean,
        max,
        errors,
        unmatched,
    })
}

/// Relative pose error over windows of `delta` associated frames.
pub fn rpe(est: &Trajectory, truth: &Trajectory, delta: usize) -> Result<RpeResult> {
    rpe_with_tolerance(est, truth, delta, DEFAULT_TOLERANCE)
}

pub fn rpe_with_tolerance(est: &Trajectory, truth: &Trajectory, delta: usize, tolerance: f64) -> Result<RpeResult> {
    if delta == 0 {
        return Err(Error::InvalidConfig("rpe delta must be >= 1".into()));
    }
    let (pairs, _) = associate(est, truth, tolerance)?;
    if pairs.len() <= delta {
        return Err(Error::TrajectoryTooShort {
            needed: delta + 1,
            got: pairs.len(),
        });
    }
    let (mut trans, mut rot) = (Vec::new(), Vec::new());
    for k in 0..pairs.len() - delta {
        let (ea, ta) = pairs[k];
        let (eb, tb) = pairs[k + delta];
        let err = ta.relative_to(&tb).invert().compose(&ea.relative_to(&eb));
        trans.push(err.translation().norm());
        rot.push(err.rotation_angle());
    }
    let (trans_rmse, trans_mean, trans_max) = stats(&trans);
    let (rot_rmse, rot_mean, rot_max) = stats(&rot);
    Ok(RpeResult {
        delta,
        trans_mean,
        trans_rmse,
        trans_max,
        rot_mean,
        rot_rmse,
        rot_max,
        trans_errors: trans,
        rot_errors: rot,
    })
}
