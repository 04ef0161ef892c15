//! Radar/IMU synchronization into per-frame bundles.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sim::{ImuSample, RadarScan};

#[derive(Clone, Debug, PartialEq)]
pub enum SensorEvent {
    Radar(RadarScan),
    Imu(ImuSample),
}

impl SensorEvent {
    pub fn timestamp(&self) -> f64 {
        match self {
            SensorEvent::Radar(s) => s.timestamp,
            SensorEvent::Imu(s) => s.timestamp,
        }
    }
}

/// Everything needed to estimate the motion between two radar frames.
#[derive(Clone, Debug, PartialEq)]
pub struct SyncedFrame {
    /// Index of the current radar frame in its stream (the first frame is 0
    /// and never produces a `SyncedFrame`).
    pub frame_index: usize,
    pub t_prev: f64,
    pub t_curr: f64,
    /// Up to `overlay_depth` most recent scans, ending with the current one.
    pub scans: Vec<RadarScan>,
    /// Up to `overlay_depth` scans ending with the previous frame.
    pub prev_scans: Vec<RadarScan>,
    /// IMU samples with `t_prev < t <= t_curr`, in order.
    pub imu_window: Vec<ImuSample>,
    /// Set when no IMU sample fell inside the interval.
    pub imu_gap: bool,
}

/// Incremental synchronizer. Streams may interleave arbitrarily with each
/// other but must each be time-ordered.
///
/// A radar frame is released once an IMU sample later than it has arrived
/// (or [`Synchronizer::finish`] is called), so its window is complete.
#[derive(Debug)]
pub struct Synchronizer {
    overlay_depth: usize,
    history: VecDeque<RadarScan>,
    pending: VecDeque<(usize, RadarScan)>,
    imu: VecDeque<ImuSample>,
    last_imu_t: Option<f64>,
    last_radar_t: Option<f64>,
    radar_seen: usize,
}

impl Synchronizer {
    pub fn new(overlay_depth: usize) -> Self {
        Self {
            overlay_depth: overlay_depth.max(1),
            history: VecDeque::new(),
            pending: VecDeque::new(),
            imu: VecDeque::new(),
            last_imu_t: None,
            last_radar_t: None,
            radar_seen: 0,
        }
    }

    pub fn push(&mut self, event: SensorEvent) -> Result<Vec<SyncedFrame>> {
        match event {
            SensorEvent::Radar(scan) => {
                if self.last_radar_t.is_some_and(|t| scan.timestamp <= t) {
                    return Err(Error::NonMonotonicStream {
                        stream: "radar",
                        t: scan.timestamp,
                    });
                }
                self.last_radar_t = Some(scan.timestamp);
                self.pending.push_back((self.radar_seen, scan));
                self.radar_seen += 1;
            }
            SensorEvent::Imu(sample) => {
                if self.last_imu_t.is_some_and(|t| sample.timestamp <= t) {
                    return Err(Error::NonMonotonicStream {
                        stream: "imu",
                        t: sample.timestamp,
                    });
                }
                self.last_imu_t = Some(sample.timestamp);
                self.imu.push_back(sample);
            }
        }
        Ok(self.release(false))
    }

    /// Flushes every pending radar frame with whatever IMU data has arrived.
    pub fn finish(&mut self) -> Vec<SyncedFrame> {
        self.release(true)
    }

    fn release(&mut self, flush: bool) -> Vec<SyncedFrame> {
        let mut out = Vec::new();
        while let Some((_, front)) = self.pending.front() {
            let ready = flush || self.last_imu_t.is_some_and(|t| t > front.timestamp);
            if !ready {
                break;
            }
            let (index, scan) = self.pending.pop_front().expect("front exists");
            let t_curr = scan.timestamp;
            let t_prev = self.history.back().map(|s| s.timestamp);

            let mut window = Vec::new();
            while self.imu.front().is_some_and(|s| s.timestamp <= t_curr) {
                let s = self.imu.pop_front().expect("front exists");
                if t_prev.is_some_and(|tp| s.timestamp > tp) {
                    window.push(s);
                }
            }

            let prev_scans = self.tail(self.history.len());
            self.history.push_back(scan);
            if self.history.len() > self.overlay_depth + 1 {
                self.history.pop_front();
            }
            if let Some(t_prev) = t_prev {
                out.push(SyncedFrame {
                    frame_index: index,
                    t_prev,
                    t_curr,
                    scans: self.tail(self.history.len()),
                    prev_scans,
                    imu_gap: window.is_empty(),
                    imu_window: window,
                });
            }
        }
        out
    }

    /// The last `overlay_depth` scans of `history[..end]`.
    fn tail(&self, end: usize) -> Vec<RadarScan> {
        let start = end.saturating_sub(self.overlay_depth);
        self.history.range(start..end).cloned().collect()
    }
}

/// Merges two time-ordered streams into arrival order, IMU first on ties.
pub fn merge_streams(radar: &[RadarScan], imu: &[ImuSample]) -> Vec<SensorEvent> {
    let mut out = Vec::with_capacity(radar.len() + imu.len());
    let (mut i, mut j) = (0, 0);
    while i < radar.len() || j < imu.len() {
        let take_imu = j < imu.len() && (i == radar.len() || imu[j].timestamp <= radar[i].timestamp);
        if take_imu {
            out.push(SensorEvent::Imu(imu[j]));
            j += 1;
        } else {
            out.push(SensorEvent::Radar(radar[i].clone()));
            i += 1;
        }
    }
    out
}

/// Offline synchronization of two complete streams.
pub fn synchronize(radar: &[RadarScan], imu: &[ImuSample], overlay_depth: usize) -> Result<Vec<SyncedFrame>> {
    let mut sync = Synchronizer::new(overlay_depth);
    let mut frames = Vec::new();
    for ev in merge_streams(radar, imu) {
        frames.extend(sync.push(ev)?);
    }
    frames.extend(sync.finish());
    Ok(frames)
}
