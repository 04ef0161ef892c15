use nalgebra::{UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::SensorNoiseConfig;
use super::mix_seed;
use crate::error::{Error, Result};
use crate::fmt::quantize9;
use crate::se3::Trajectory;

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ImuSample {
    pub timestamp: f64,
    /// Body-frame angular rate, rad/s.
    pub gyro: [f64; 3],
    /// Body-frame specific force, m/s². A level sensor at rest reads `(0, 0, +g)`.
    pub accel: [f64; 3],
}

impl ImuSample {
    pub fn is_finite(&self) -> bool {
        self.timestamp.is_finite() && self.gyro.iter().chain(&self.accel).all(|v| v.is_finite())
    }
}

const IMU_STREAM: u64 = 0x49_4d_55;

/// Synthesizes an IMU stream from a dense trajectory.
///
/// Angular rate is the forward difference of orientation and acceleration the
/// second difference of position, with the device at rest before the first
/// and after the last sample. With noise and bias off, integrating the
/// samples with a first-order strapdown scheme reproduces the trajectory.
pub fn imu_stream(traj: &Trajectory, cfg: &SensorNoiseConfig) -> Result<Vec<ImuSample>> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::TrajectoryTooShort { needed: 3, got: n });
    }
    cfg.validate()?;
    let entries = traj.entries();
    let dt = (entries[n - 1].0 - entries[0].0) / (n - 1) as f64;
    let rate = 1.0 / dt;
    let gyro_noise = Normal::new(0.0, cfg.gyro_sigma * rate.sqrt()).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let accel_noise = Normal::new(0.0, cfg.accel_sigma * rate.sqrt()).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.rng_seed, IMU_STREAM));

    let gravity = Vector3::new(0.0, 0.0, -GRAVITY);
    let pos = |i: isize| -> Vector3<f64> {
        let i = i.clamp(0, n as isize - 1) as usize;
        *entries[i].1.translation()
    };
    let body_rate = |i: usize| -> Vector3<f64> {
        let i = i.min(n - 2);
        let (a, b) = (entries[i].1.rotation(), entries[i + 1].1.rotation());
        let delta: UnitQuaternion<f64> = a.inverse() * b;
        delta.scaled_axis() / dt
    };

    let mut out = Vec::with_capacity(n);
    for (i, (t, pose)) in entries.iter().enumerate() {
        let ii = i as isize;
        let acc = (pos(ii + 1) - 2.0 * pos(ii) + pos(ii - 1)) / (dt * dt);
        let f = pose.rotation().inverse() * (acc - gravity);
        let w = body_rate(i);
        let mut gyro = [0.0; 3];
        let mut accel = [0.0; 3];
        for k in 0..3 {
            gyro[k] = quantize9(w[k] + cfg.gyro_bias[k] + gyro_noise.sample(&mut rng));
            accel[k] = quantize9(f[k] + cfg.accel_bias[k] + accel_noise.sample(&mut rng));
        }
        out.push(ImuSample {
            timestamp: *t,
            gyro,
            accel,
        });
    }
    Ok(out)
}
