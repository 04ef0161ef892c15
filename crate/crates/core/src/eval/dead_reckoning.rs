use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::se3::{PoseSE3, Trajectory};
use crate::sim::{ImuSample, GRAVITY};

/// First-order strapdown integration starting at rest at `origin`.
///
/// For each interval `dt = t[i+1] - t[i]`:
/// `v += (R f + g) dt`, `p += v dt`, `R = R exp(ω dt)`.
pub fn imu_dead_reckoning(imu: &[ImuSample], origin: PoseSE3) -> Result<Trajectory> {
    if imu.len() < 2 {
        return Err(Error::TrajectoryTooShort {
            needed: 2,
            got: imu.len(),
        });
    }
    let gravity = Vector3::new(0.0, 0.0, -GRAVITY);
    let mut rot = *origin.rotation();
    let mut pos = *origin.translation();
    let mut vel = Vector3::zeros();
    let mut entries = Vec::with_capacity(imu.len());
    entries.push((imu[0].timestamp, origin));
    for w in imu.windows(2) {
        let (s, next) = (&w[0], &w[1]);
        let dt = next.timestamp - s.timestamp;
        let acc = rot * Vector3::from(s.accel) + gravity;
        vel += acc * dt;
        pos += vel * dt;
        rot *= UnitQuaternion::from_scaled_axis(Vector3::from(s.gyro) * dt);
        entries.push((next.timestamp, PoseSE3::from_quaternion(*rot.quaternion(), pos)));
    }
    Trajectory::from_entries(entries)
}
