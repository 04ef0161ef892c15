//! Per-frame payloads passed between stages.

use std::time::Instant;

use super::queue::Coalesce;
use super::sync::SyncedFrame;
use crate::error::Result;
use crate::imaging::{image_pair, panoramic_image, ImagingConfig};
use crate::model::Tensor;
use crate::se3::PoseSE3;
use crate::sim::{ImuSample, GRAVITY};

impl Coalesce for SyncedFrame {
    fn absorb_older(&mut self, older: Self) {
        self.t_prev = older.t_prev;
        self.prev_scans = older.prev_scans;
        let mut window = older.imu_window;
        window.append(&mut self.imu_window);
        self.imu_gap = window.is_empty();
        self.imu_window = window;
    }
}

/// Network-ready inputs for one frame.
#[derive(Clone, Debug)]
pub struct ImagedFrame {
    pub frame_index: usize,
    pub t_prev: f64,
    pub t_curr: f64,
    /// `[2, H, W]`, previous then current image.
    pub pair: Tensor,
    pub imu_window: Vec<ImuSample>,
    pub(crate) arrived: Instant,
}

impl ImagedFrame {
    pub fn from_synced(frame: SyncedFrame, cfg: &ImagingConfig) -> Result<Self> {
        Self::build(frame, cfg, Instant::now())
    }

    pub(crate) fn build(frame: SyncedFrame, cfg: &ImagingConfig, arrived: Instant) -> Result<Self> {
        let prev = panoramic_image(&frame.prev_scans, cfg)?;
        let curr = panoramic_image(&frame.scans, cfg)?;
        Ok(Self {
            frame_index: frame.frame_index,
            t_prev: frame.t_prev,
            t_curr: frame.t_curr,
            pair: image_pair(&prev, &curr)?,
            imu_window: frame.imu_window,
            arrived,
        })
    }
}

impl Coalesce for ImagedFrame {
    fn absorb_older(&mut self, older: Self) {
        // the surviving pair spans from the evicted frame's previous image
        let half = self.pair.len() / 2;
        self.pair.data_mut()[..half].copy_from_slice(&older.pair.data()[..half]);
        self.t_prev = older.t_prev;
        self.arrived = older.arrived;
        let mut window = older.imu_window;
        window.append(&mut self.imu_window);
        self.imu_window = window;
    }
}

/// Estimated motion from `t_prev` to `t_curr`.
#[derive(Clone, Debug)]
pub struct MotionUpdate {
    pub frame_index: usize,
    pub t_prev: f64,
    pub t_curr: f64,
    pub motion: PoseSE3,
    pub(crate) arrived: Instant,
}

impl Coalesce for MotionUpdate {
    fn absorb_older(&mut self, older: Self) {
        self.motion = older.motion.compose(&self.motion);
        self.t_prev = older.t_prev;
        self.arrived = older.arrived;
    }
}

/// A window the network can consume. An empty window is replaced by the most
/// recent sample seen (zero-order hold), or by a body at rest if none.
pub fn hold_window(window: &[ImuSample], last: Option<&ImuSample>, t: f64) -> Vec<ImuSample> {
    if !window.is_empty() {
        return window.to_vec();
    }
    let held = last.copied().unwrap_or(ImuSample {
        timestamp: t,
        gyro: [0.0; 3],
        accel: [0.0, 0.0, GRAVITY],
    });
    vec![ImuSample { timestamp: t, ..held }]
}
