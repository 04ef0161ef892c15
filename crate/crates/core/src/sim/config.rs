use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ray grid and range limits of the simulated radar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarGeometry {
    /// Full azimuth field of view, radians.
    pub azimuth_fov: f64,
    /// Full elevation field of view, radians.
    pub elevation_fov: f64,
    pub azimuth_rays: usize,
    pub elevation_rays: usize,
    pub max_range: f64,
    pub max_points: usize,
}

impl Default for RadarGeometry {
    fn default() -> Self {
        Self {
            azimuth_fov: 120f64.to_radians(),
            elevation_fov: 30f64.to_radians(),
            azimuth_rays: 32,
            elevation_rays: 4,
            max_range: 8.0,
            max_points: 256,
        }
    }
}

impl RadarGeometry {
    /// Ray directions as `(azimuth, elevation)` at the centres of an even
    /// grid over the field of view, elevation-major.
    pub fn ray_angles(&self) -> Vec<(f64, f64)> {
        let mut rays = Vec::with_capacity(self.azimuth_rays * self.elevation_rays);
        for i in 0..self.elevation_rays {
            let el = -0.5 * self.elevation_fov + (i as f64 + 0.5) * self.elevation_fov / self.elevation_rays as f64;
            for j in 0..self.azimuth_rays {
                let az = -0.5 * self.azimuth_fov + (j as f64 + 0.5) * self.azimuth_fov / self.azimuth_rays as f64;
                rays.push((az, el));
            }
        }
        rays
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorNoiseConfig {
    /// Radar range noise, metres.
    pub range_sigma: f64,
    /// Radar angular noise, radians.
    pub angle_sigma: f64,
    pub detection_prob: f64,
    /// Mean number of ghost points per scan.
    pub ghost_rate: f64,
    /// Gyro white noise density, rad/s/√Hz.
    pub gyro_sigma: f64,
    /// Accelerometer white noise density, m/s²/√Hz.
    pub accel_sigma: f64,
    /// Constant per-axis gyro bias, rad/s.
    pub gyro_bias: [f64; 3],
    /// Constant per-axis accelerometer bias, m/s².
    pub accel_bias: [f64; 3],
    pub rng_seed: u64,
    pub radar: RadarGeometry,
}

impl Default for SensorNoiseConfig {
    fn default() -> Self {
        Self {
            range_sigma: 0.05,
            angle_sigma: 1f64.to_radians(),
            detection_prob: 0.78,
            ghost_rate: 5.0,
            gyro_sigma: 1e-3,
            accel_sigma: 1e-2,
            gyro_bias: [0.01; 3],
            accel_bias: [0.1; 3],
            rng_seed: 0,
            radar: RadarGeometry::default(),
        }
    }
}

impl SensorNoiseConfig {
    /// Everything off: exact ranges, every ray detected, no ghosts, clean IMU.
    pub fn noiseless() -> Self {
        Self {
            range_sigma: 0.0,
            angle_sigma: 0.0,
            detection_prob: 1.0,
            ghost_rate: 0.0,
            gyro_sigma: 0.0,
            accel_sigma: 0.0,
            gyro_bias: [0.0; 3],
            accel_bias: [0.0; 3],
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [self.range_sigma, self.angle_sigma, self.gyro_sigma, self.accel_sigma];
        if sigmas.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidConfig("noise sigmas must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.detection_prob) {
            return Err(Error::InvalidConfig("detection_prob must lie in [0, 1]".into()));
        }
        if !(self.ghost_rate >= 0.0) {
            return Err(Error::InvalidConfig("ghost_rate must be >= 0".into()));
        }
        let g = &self.radar;
        if !(g.azimuth_fov > 0.0 && g.elevation_fov > 0.0 && g.max_range > 0.0) {
            return Err(Error::InvalidConfig("radar FOVs and max_range must be > 0".into()));
        }
        if g.azimuth_rays == 0 || g.elevation_rays == 0 {
            return Err(Error::InvalidConfig("radar ray grid must be non-empty".into()));
        }
        Ok(())
    }
}
