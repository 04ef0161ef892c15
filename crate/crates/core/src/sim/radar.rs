use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::config::SensorNoiseConfig;
use super::floorplan::Floorplan;
use super::mix_seed;
use crate::error::{Error, Result};
use crate::fmt::quantize9;
use crate::se3::PoseSE3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadarPoint {
    /// Sensor-frame position (x forward, y left, z up), metres.
    pub position: [f64; 3],
    pub intensity: f64,
}

impl RadarPoint {
    pub fn new(position: [f64; 3], intensity: f64) -> Self {
        Self { position, intensity }
    }

    pub fn range(&self) -> f64 {
        let [x, y, z] = self.position;
        (x * x + y * y + z * z).sqrt()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadarScan {
    pub timestamp: f64,
    pub points: Vec<RadarPoint>,
}

impl RadarScan {
    pub fn new(timestamp: f64, points: Vec<RadarPoint>) -> Self {
        Self { timestamp, points }
    }
}

pub(crate) fn direction(azimuth: f64, elevation: f64) -> Vector3<f64> {
    let (se, ce) = elevation.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    Vector3::new(ce * ca, ce * sa, se)
}

/// Noise-free range along the sensor-frame direction `(azimuth, elevation)`.
pub fn cast_ray(plan: &Floorplan, pose: &PoseSE3, azimuth: f64, elevation: f64, max_range: f64) -> Option<f64> {
    let dir = pose.rotate(&direction(azimuth, elevation));
    plan.ray_cast(pose.translation(), &dir, max_range)
}

fn intensity(range: f64, max_range: f64) -> f64 {
    (1.0 - range / max_range).clamp(0.0, 1.0)
}

/// Simulates one radar scan from `pose` at time `t`.
///
/// The output depends only on `(plan, pose, cfg, t)`: the random stream is
/// keyed by the configured seed and the timestamp.
pub fn radar_scan(plan: &Floorplan, pose: &PoseSE3, cfg: &SensorNoiseConfig, t: f64) -> Result<RadarScan> {
    let p = pose.translation();
    if !plan.bounds().contains([p.x, p.y]) {
        return Err(Error::PoseOutsideBounds { x: p.x, y: p.y });
    }
    let geo = &cfg.radar;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.rng_seed, t.to_bits()));
    let range_noise = Normal::new(0.0, cfg.range_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let angle_noise = Normal::new(0.0, cfg.angle_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut points = Vec::new();
    let emit = |points: &mut Vec<RadarPoint>, r: f64, az: f64, el: f64| {
        let v = direction(az, el) * r;
        let pt = RadarPoint::new([quantize9(v.x), quantize9(v.y), quantize9(v.z)], 0.0);
        let range = pt.range();
        if range > 0.0 && range <= geo.max_range {
            points.push(RadarPoint {
                intensity: quantize9(intensity(range, geo.max_range)),
                ..pt
            });
        }
    };

    for (az, el) in geo.ray_angles() {
        let Some(hit) = cast_ray(plan, pose, az, el, geo.max_range) else {
            continue;
        };
        if rng.gen::<f64>() >= cfg.detection_prob {
            continue;
        }
        let r = hit + range_noise.sample(&mut rng);
        let az = az + angle_noise.sample(&mut rng);
        let el = el + angle_noise.sample(&mut rng);
        emit(&mut points, r, az, el);
    }

    if cfg.ghost_rate > 0.0 {
        let n = Poisson::new(cfg.ghost_rate)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .sample(&mut rng) as usize;
        for _ in 0..n {
            let az = rng.gen_range(-0.5..0.5) * geo.azimuth_fov;
            let el = rng.gen_range(-0.5..0.5) * geo.elevation_fov;
            let r = rng.gen_range(0.0..geo.max_range);
            emit(&mut points, r, az, el);
        }
    }
    points.truncate(geo.max_points);
    Ok(RadarScan::new(t, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Floorplan;

    #[test]
    fn boresight_ray_hits_facing_wall() {
        let plan = Floorplan::square_room(8.0, 3.0);
        let pose = PoseSE3::from_translation(Vector3::new(0.0, 0.0, 1.2));
        let r = cast_ray(&plan, &pose, 0.0, 0.0, 8.0).unwrap();
        let p = direction(0.0, 0.0) * r;
        assert!((p - Vector3::new(4.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn no_detections_no_ghosts_is_empty() {
        let plan = Floorplan::square_room(8.0, 3.0);
        let cfg = SensorNoiseConfig {
            detection_prob: 0.0,
            ghost_rate: 0.0,
            ..SensorNoiseConfig::default()
        };
        let pose = PoseSE3::from_translation(Vector3::new(0.0, 0.0, 1.2));
        assert!(radar_scan(&plan, &pose, &cfg, 0.0).unwrap().points.is_empty());
    }

    #[test]
    fn noiseless_points_lie_on_surfaces() {
        let plan = Floorplan::square_room(8.0, 3.0);
        let cfg = SensorNoiseConfig::noiseless();
        let pose = PoseSE3::from_yaw_translation(0.4, Vector3::new(0.5, -1.0, 1.2));
        let scan = radar_scan(&plan, &pose, &cfg, 0.0).unwrap();
        assert_eq!(scan.points.len(), 128);
        for pt in &scan.points {
            let w = pose.transform_point(&Vector3::from(pt.position));
            let on_wall = (w.x.abs() - 4.0).abs() < 1e-6 || (w.y.abs() - 4.0).abs() < 1e-6;
            assert!(on_wall || w.z.abs() < 1e-6, "{w:?}");
            assert!((pt.intensity - (1.0 - pt.range() / 8.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn deterministic_per_seed_and_time() {
        let plan = Floorplan::apartment();
        let cfg = SensorNoiseConfig::default().with_seed(3);
        let pose = PoseSE3::from_translation(Vector3::new(2.0, 2.0, 1.2));
        let a = radar_scan(&plan, &pose, &cfg, 1.0).unwrap();
        let b = radar_scan(&plan, &pose, &cfg, 1.0).unwrap();
        let c = radar_scan(&plan, &pose, &cfg, 1.1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn outside_bounds_is_rejected() {
        let plan = Floorplan::apartment();
        let pose = PoseSE3::from_translation(Vector3::new(-1.0, 2.0, 1.2));
        assert!(matches!(
            radar_scan(&plan, &pose, &SensorNoiseConfig::default(), 0.0),
            Err(Error::PoseOutsideBounds { .. })
        ));
    }

    #[test]
    fn point_cap_applies() {
        let plan = Floorplan::square_room(8.0, 3.0);
        let mut cfg = SensorNoiseConfig::noiseless();
        cfg.radar.max_points = 10;
        let pose = PoseSE3::from_translation(Vector3::new(0.0, 0.0, 1.2));
        assert_eq!(radar_scan(&plan, &pose, &cfg, 0.0).unwrap().points.len(), 10);
    }
}
