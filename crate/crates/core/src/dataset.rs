//! Supervised frame pairs built from recorded sequences.

use crate::error::{Error, Result};
use crate::imaging::ImagingConfig;
use crate::model::Sample;
use crate::pipeline::{hold_window, synchronize, ImagedFrame};
use crate::se3::{sixdof_from_pose, PoseSE3, Trajectory};
use crate::sim::{ImuSample, Sequence};

/// Truth timestamps are the IMU grid and radar frames lie on it, so pose
/// lookups only need to absorb formatting round-off.
const TRUTH_TOLERANCE: f64 = 1e-6;

fn truth_at(truth: &Trajectory, t: f64) -> Result<&PoseSE3> {
    truth.pose_near(t, TRUTH_TOLERANCE).ok_or(Error::NoTemporalOverlap)
}

/// One [`Sample`] per radar frame after the first, in time order. Inputs are
/// built exactly as the runtime builds them; the target is the true motion
/// expressed in the previous frame's body frame.
pub fn samples_from_sequence(seq: &Sequence, imaging: &ImagingConfig) -> Result<Vec<Sample>> {
    imaging.validate()?;
    let frames = synchronize(&seq.scans, &seq.imu, imaging.overlay_depth)?;
    let mut last: Option<ImuSample> = None;
    let mut out = Vec::with_capacity(frames.len());
    for frame in frames {
        let prev = truth_at(&seq.truth, frame.t_prev)?;
        let curr = truth_at(&seq.truth, frame.t_curr)?;
        let target = sixdof_from_pose(&prev.relative_to(curr))?;
        let imaged = ImagedFrame::from_synced(frame, imaging)?;
        let imu = hold_window(&imaged.imu_window, last.as_ref(), imaged.t_curr);
        last = imu.last().copied();
        out.push(Sample {
            pair: imaged.pair,
            imu,
            target,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::pose_from_6dof;
    use crate::sim::{routes, simulate, Floorplan, MotionScript, SensorNoiseConfig};

    #[test]
    fn targets_chain_back_to_truth() {
        let plan = Floorplan::apartment();
        let script = MotionScript::walk(routes::LIVING_LOOP, 30.0, 0.5, 1.5).unwrap();
        let seq = simulate(&plan, &script, &SensorNoiseConfig::default().with_seed(3)).unwrap();
        let samples = samples_from_sequence(&seq, &ImagingConfig::default()).unwrap();
        assert_eq!(samples.len(), seq.scans.len() - 1);

        let mut pose = *truth_at(&seq.truth, seq.scans[0].timestamp).unwrap();
        for s in &samples {
            assert_eq!(s.pair.shape(), &[2, 16, 64]);
            assert_eq!(s.imu.len(), 10);
            pose = pose.compose(&pose_from_6dof(&s.target));
        }
        let end = truth_at(&seq.truth, seq.scans.last().unwrap().timestamp).unwrap();
        assert!((pose.translation() - end.translation()).norm() < 1e-9);
    }
}
