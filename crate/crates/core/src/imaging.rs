//! Radar front-end: overlay consecutive scans and project them into a
//! panoramic (azimuth x elevation) depth image.
//!
//! Pixels hold `1 - r_min / max_range` for the nearest return that falls in
//! them, so nearer is brighter and `0` means "no return".

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Tensor;
use crate::sim::RadarScan;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImagingConfig {
    pub height: usize,
    pub width: usize,
    /// Full azimuth field of view, radians.
    pub azimuth_fov: f64,
    /// Full elevation field of view, radians.
    pub elevation_fov: f64,
    pub max_range: f64,
    /// Number of consecutive scans merged into one image.
    pub overlay_depth: usize,
}

impl Default for ImagingConfig {
    fn default() -> Self {
        Self {
            height: 16,
            width: 64,
            azimuth_fov: 120f64.to_radians(),
            elevation_fov: 30f64.to_radians(),
            max_range: 8.0,
            overlay_depth: 3,
        }
    }
}

impl ImagingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::InvalidConfig("image dimensions must be >= 1".into()));
        }
        if !(self.azimuth_fov > 0.0 && self.elevation_fov > 0.0 && self.max_range > 0.0) {
            return Err(Error::InvalidConfig("FOVs and max_range must be > 0".into()));
        }
        if self.overlay_depth == 0 {
            return Err(Error::InvalidConfig("overlay_depth must be >= 1".into()));
        }
        Ok(())
    }

    /// Pixel `(row, col)` a sensor-frame point falls into, or `None` when it
    /// is outside the field of view or beyond `max_range`.
    pub fn pixel_of(&self, p: [f64; 3]) -> Option<(usize, usize)> {
        let [x, y, z] = p;
        let r = (x * x + y * y + z * z).sqrt();
        if r > self.max_range {
            return None;
        }
        let az = y.atan2(x);
        let el = z.atan2(x.hypot(y));
        let (half_az, half_el) = (0.5 * self.azimuth_fov, 0.5 * self.elevation_fov);
        if az.abs() > half_az || el.abs() > half_el {
            return None;
        }
        let col = ((az + half_az) / self.azimuth_fov * self.width as f64).floor() as usize;
        let row = ((half_el - el) / self.elevation_fov * self.height as f64).floor() as usize;
        Some((row.min(self.height - 1), col.min(self.width - 1)))
    }

    /// `(azimuth, elevation)` of a pixel centre.
    pub fn pixel_direction(&self, row: usize, col: usize) -> (f64, f64) {
        let az = (col as f64 + 0.5) / self.width as f64 * self.azimuth_fov - 0.5 * self.azimuth_fov;
        let el = 0.5 * self.elevation_fov - (row as f64 + 0.5) / self.height as f64 * self.elevation_fov;
        (az, el)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PanoramicImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
    pub frame_timestamp: f64,
}

impl PanoramicImage {
    pub fn zeros(height: usize, width: usize, frame_timestamp: f64) -> Self {
        Self {
            height,
            width,
            data: vec![0.0; height * width],
            frame_timestamp,
        }
    }

    pub fn from_data(height: usize, width: usize, data: Vec<f64>, frame_timestamp: f64) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: vec![height * width],
                got: vec![data.len()],
            });
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidConfig("pixel values must lie in [0, 1]".into()));
        }
        Ok(Self {
            height,
            width,
            data,
            frame_timestamp,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Writes an ASCII PGM (P2, maxval 255) for visual inspection.
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.data.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| ((255.0 * v).round() as u8).to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        std::fs::File::create(path)?.write_all(out.as_bytes())?;
        Ok(())
    }
}

/// Union of the points of 1..=`overlay_depth` consecutive scans, kept in
/// their own sensor frames (no motion compensation), stamped with the newest
/// scan's time.
pub fn overlay(scans: &[RadarScan], cfg: &ImagingConfig) -> Result<RadarScan> {
    let newest = scans.last().ok_or(Error::EmptyInput)?;
    if scans.len() > cfg.overlay_depth {
        return Err(Error::InvalidConfig(format!(
            "{} scans given, overlay depth is {}",
            scans.len(),
            cfg.overlay_depth
        )));
    }
    for (i, w) in scans.windows(2).enumerate() {
        if !(w[1].timestamp > w[0].timestamp) {
            return Err(Error::NonMonotonicTimestamps { index: i + 1 });
        }
    }
    let points = scans.iter().flat_map(|s| s.points.iter().copied()).collect();
    Ok(RadarScan::new(newest.timestamp, points))
}

pub fn project(scan: &RadarScan, cfg: &ImagingConfig) -> PanoramicImage {
    let mut nearest = vec![f64::INFINITY; cfg.height * cfg.width];
    for p in &scan.points {
        if let Some((row, col)) = cfg.pixel_of(p.position) {
            let r = p.range();
            let slot = &mut nearest[row * cfg.width + col];
            if r < *slot {
                *slot = r;
            }
        }
    }
    let data = nearest
        .into_iter()
        .map(|r| if r.is_finite() { 1.0 - r / cfg.max_range } else { 0.0 })
        .collect();
    PanoramicImage {
        height: cfg.height,
        width: cfg.width,
        data,
        frame_timestamp: scan.timestamp,
    }
}

/// Overlays then projects.
pub fn panoramic_image(scans: &[RadarScan], cfg: &ImagingConfig) -> Result<PanoramicImage> {
    Ok(project(&overlay(scans, cfg)?, cfg))
}

/// Stacks two images into a `[2, H, W]` tensor: channel 0 is `prev`,
/// channel 1 is `curr`.
pub fn image_pair(prev: &PanoramicImage, curr: &PanoramicImage) -> Result<Tensor> {
    if prev.height != curr.height || prev.width != curr.width {
        return Err(Error::ShapeMismatch {
            expected: vec![prev.height, prev.width],
            got: vec![curr.height, curr.width],
        });
    }
    let mut data = Vec::with_capacity(2 * prev.data.len());
    data.extend_from_slice(&prev.data);
    data.extend_from_slice(&curr.data);
    Tensor::from_data(vec![2, prev.height, prev.width], data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RadarPoint;

    fn scan(t: f64, n: usize) -> RadarScan {
        RadarScan::new(t, (0..n).map(|i| RadarPoint::new([1.0 + i as f64 * 0.01, 0.0, 0.0], 0.5)).collect())
    }

    #[test]
    fn overlay_unions_points() {
        let cfg = ImagingConfig::default();
        let one = overlay(&[scan(0.0, 10)], &cfg).unwrap();
        assert_eq!(one, scan(0.0, 10));
        let all = overlay(&[scan(0.0, 10), scan(0.1, 20), scan(0.2, 30)], &cfg).unwrap();
        assert_eq!(all.points.len(), 60);
        assert_eq!(all.timestamp, 0.2);
    }

    #[test]
    fn overlay_keeps_duplicates() {
        let p = RadarPoint::new([2.0, 0.0, 0.0], 0.75);
        let a = RadarScan::new(0.0, vec![p]);
        let b = RadarScan::new(0.1, vec![p]);
        let out = overlay(&[a, b], &ImagingConfig::default()).unwrap();
        assert_eq!(out.points, vec![p, p]);
    }

    #[test]
    fn overlay_errors() {
        let cfg = ImagingConfig::default();
        assert!(matches!(overlay(&[], &cfg), Err(Error::EmptyInput)));
        assert!(matches!(
            overlay(&[scan(0.1, 1), scan(0.1, 1)], &cfg),
            Err(Error::NonMonotonicTimestamps { index: 1 })
        ));
    }

    #[test]
    fn empty_scan_projects_to_zeros() {
        let img = project(&RadarScan::new(0.0, vec![]), &ImagingConfig::default());
        assert!(img.data().iter().all(|v| *v == 0.0));
        assert_eq!((img.height(), img.width()), (16, 64));
    }

    #[test]
    fn single_point_lands_in_centre_column() {
        // column floor((0 + 60°) / 120° * 64) = 32, row floor((15° - 0) / 30° * 16) = 8
        let cfg = ImagingConfig::default();
        let img = project(&RadarScan::new(0.0, vec![RadarPoint::new([2.0, 0.0, 0.0], 0.0)]), &cfg);
        assert_eq!(img.get(8, 32), 0.75);
        assert_eq!(img.data().iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn nearest_point_wins() {
        let cfg = ImagingConfig::default();
        let pts = vec![RadarPoint::new([4.0, 0.0, 0.0], 0.0), RadarPoint::new([2.0, 0.0, 0.0], 0.0)];
        let img = project(&RadarScan::new(0.0, pts), &cfg);
        assert_eq!(img.get(8, 32), 0.75);
    }

    #[test]
    fn image_pair_stacks_channels() {
        let a = PanoramicImage::from_data(2, 2, vec![0.1, 0.2, 0.3, 0.4], 0.0).unwrap();
        let b = PanoramicImage::from_data(2, 2, vec![0.5, 0.6, 0.7, 0.8], 0.1).unwrap();
        let t = image_pair(&a, &b).unwrap();
        assert_eq!(t.shape(), &[2, 2, 2]);
        assert_eq!(&t.data()[..4], a.data());
        assert_eq!(&t.data()[4..], b.data());
        let z = PanoramicImage::zeros(2, 2, 0.0);
        assert!(image_pair(&z, &z).unwrap().data().iter().all(|v| *v == 0.0));
        let tall = PanoramicImage::zeros(3, 2, 0.0);
        assert!(matches!(image_pair(&a, &tall), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn pgm_dump() {
        let dir = tempfile::tempdir().unwrap();
        let img = PanoramicImage::from_data(1, 3, vec![0.0, 0.5, 1.0], 0.0).unwrap();
        let path = dir.path().join("a.pgm");
        img.write_pgm(&path).unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), "P2\n3 1\n255\n0 128 255\n");
    }
}
