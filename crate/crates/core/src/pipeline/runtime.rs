//! Threaded streaming runtime.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::codec::PoseMessage;
use super::frame::{hold_window, ImagedFrame, MotionUpdate};
use super::queue::{BoundedQueue, Coalesce};
use super::stats::{summarize, PipelineStats};
use super::sync::{merge_streams, SensorEvent, SyncedFrame, Synchronizer};
use super::uplink::{UplinkClient, UPLINK_ENV};
use crate::error::{Error, Result};
use crate::imaging::ImagingConfig;
use crate::model::{infer_pair, initial_hidden, ModelConfig, ModelParams};
use crate::se3::{pose_from_6dof, PoseSE3, Trajectory};
use crate::sim::{ImuSample, RadarScan, Sequence};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Unpaced, lossless: every stage blocks on a full queue.
    #[default]
    Offline,
    /// Paced by source timestamps; full queues drop their oldest frame.
    Realtime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub imaging: ImagingConfig,
    pub queue_capacity: usize,
    /// Extra time spent per inference call, seconds. Emulates a slow device.
    pub inference_delay_s: f64,
    /// `host:port` of a pose sink.
    pub uplink: Option<String>,
    /// Replay speed multiplier for real-time pacing.
    pub replay_speed: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Offline,
            imaging: ImagingConfig::default(),
            queue_capacity: 4,
            inference_delay_s: 0.0,
            uplink: None,
            replay_speed: 1.0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.imaging.validate()?;
        if self.queue_capacity == 0 {
            return Err(Error::InvalidConfig("queue_capacity must be >= 1".into()));
        }
        if !(self.inference_delay_s >= 0.0) || !(self.replay_speed > 0.0) {
            return Err(Error::InvalidConfig(
                "inference_delay_s must be >= 0 and replay_speed > 0".into(),
            ));
        }
        Ok(())
    }

    /// Applies the `MIO_UPLINK_ADDR` override, if set.
    pub fn with_env_uplink(mut self) -> Self {
        if let Ok(addr) = std::env::var(UPLINK_ENV) {
            if !addr.trim().is_empty() {
                self.uplink = Some(addr.trim().to_string());
            }
        }
        self
    }
}

/// A live or recorded stream of sensor events in arrival order.
pub trait SensorSource: Send {
    /// `None` when the source is exhausted.
    fn next_event(&mut self) -> Option<SensorEvent>;
}

/// Replays recorded streams, optionally paced against the wall clock.
#[derive(Debug)]
pub struct ReplaySource {
    events: std::vec::IntoIter<SensorEvent>,
    speed: Option<f64>,
    start: Option<(Instant, f64)>,
}

impl ReplaySource {
    pub fn new(radar: &[RadarScan], imu: &[ImuSample]) -> Self {
        Self {
            events: merge_streams(radar, imu).into_iter(),
            speed: None,
            start: None,
        }
    }

    pub fn from_sequence(seq: &Sequence) -> Self {
        Self::new(&seq.scans, &seq.imu)
    }

    /// Releases each event no earlier than its timestamp (divided by
    /// `speed`) after the first one.
    pub fn paced(mut self, speed: f64) -> Self {
        self.speed = Some(speed);
        self
    }
}

impl SensorSource for ReplaySource {
    fn next_event(&mut self) -> Option<SensorEvent> {
        let ev = self.events.next()?;
        if let Some(speed) = self.speed {
            let (t0_wall, t0) = *self.start.get_or_insert((Instant::now(), ev.timestamp()));
            let due = t0_wall + Duration::from_secs_f64(((ev.timestamp() - t0) / speed).max(0.0));
            let now = Instant::now();
            if due > now {
                std::thread::sleep(due - now);
            }
        }
        Some(ev)
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    /// Starts at the identity at the first radar frame's timestamp.
    pub trajectory: Trajectory,
    pub stats: PipelineStats,
    /// Every pose emitted, in order, whether or not the uplink delivered it.
    pub messages: Vec<PoseMessage>,
}

#[derive(Debug)]
struct Timed<T> {
    item: T,
    arrived: Instant,
}

impl<T: Coalesce> Coalesce for Timed<T> {
    fn absorb_older(&mut self, older: Self) {
        self.item.absorb_older(older.item);
        self.arrived = older.arrived;
    }
}

/// Either blocks (offline) or evicts (real-time). `false` once the queue
/// has been closed downstream.
fn offer<T: Coalesce>(q: &BoundedQueue<T>, item: T, mode: Mode) -> bool {
    match mode {
        Mode::Offline => q.push_blocking(item).is_ok(),
        Mode::Realtime => q.push_evicting(item).is_ok(),
    }
}

#[derive(Default)]
struct Shared {
    error: Mutex<Option<Error>>,
}

impl Shared {
    fn fail(&self, e: Error) {
        let mut slot = self.error.lock().expect("error lock");
        if slot.is_none() {
            *slot = Some(e);
        }
    }
}

/// Runs ingest+sync, imaging, inference and accumulate+uplink as four
/// threads joined by bounded queues and returns once the source is drained.
pub fn run_pipeline<S: SensorSource>(source: S, params: &ModelParams, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let expected = ModelConfig {
        height: cfg.imaging.height,
        width: cfg.imaging.width,
    };
    if *params.config() != expected {
        return Err(Error::CheckpointMismatch(format!(
            "model expects {}x{} images, pipeline produces {}x{}",
            params.config().height,
            params.config().width,
            expected.height,
            expected.width
        )));
    }

    let mode = cfg.mode;
    let q_sync: BoundedQueue<Timed<SyncedFrame>> = BoundedQueue::new(cfg.queue_capacity);
    let q_image: BoundedQueue<ImagedFrame> = BoundedQueue::new(cfg.queue_capacity);
    let q_motion: BoundedQueue<MotionUpdate> = BoundedQueue::new(cfg.queue_capacity);
    let shared = Shared::default();
    let close_all = || {
        q_sync.close();
        q_image.close();
        q_motion.close();
    };
    let started = Instant::now();

    let (ingest, imaging, inference, sink) = std::thread::scope(|scope| {
        let ingest = scope.spawn(|| {
            let mut source = source;
            let mut sync = Synchronizer::new(cfg.imaging.overlay_depth);
            let mut arrivals: Vec<Instant> = Vec::new();
            let mut latencies = Vec::new();
            let mut offered = 0usize;
            let mut emit = |frames: Vec<SyncedFrame>, arrivals: &[Instant]| -> bool {
                for f in frames {
                    let arrived = arrivals[f.frame_index];
                    latencies.push(arrived.elapsed());
                    offered += 1;
                    if !offer(&q_sync, Timed { item: f, arrived }, mode) {
                        return false;
                    }
                }
                true
            };
            let mut live = true;
            while let Some(ev) = source.next_event() {
                if matches!(ev, SensorEvent::Radar(_)) {
                    arrivals.push(Instant::now());
                }
                match sync.push(ev) {
                    Ok(frames) => {
                        if !emit(frames, &arrivals) {
                            live = false;
                            break;
                        }
                    }
                    Err(e) => {
                        shared.fail(e);
                        close_all();
                        live = false;
                        break;
                    }
                }
            }
            if live {
                emit(sync.finish(), &arrivals);
            }
            q_sync.close();
            (offered, latencies)
        });

        let imaging = scope.spawn(|| {
            let mut latencies = Vec::new();
            while let Some(Timed { item, arrived }) = q_sync.pop() {
                let t0 = Instant::now();
                match ImagedFrame::build(item, &cfg.imaging, arrived) {
                    Ok(frame) => {
                        latencies.push(t0.elapsed());
                        if !offer(&q_image, frame, mode) {
                            break;
                        }
                    }
                    Err(e) => {
                        shared.fail(e);
                        close_all();
                        break;
                    }
                }
            }
            q_image.close();
            latencies
        });

        let inference = scope.spawn(|| {
            let mut latencies = Vec::new();
            let mut hidden = initial_hidden();
            let mut last_imu: Option<ImuSample> = None;
            let delay = Duration::from_secs_f64(cfg.inference_delay_s);
            while let Some(frame) = q_image.pop() {
                let t0 = Instant::now();
                let window = hold_window(&frame.imu_window, last_imu.as_ref(), frame.t_curr);
                last_imu = window.last().copied();
                let motion = match infer_pair(&frame.pair, &window, &hidden, params) {
                    Ok((d, h)) => {
                        hidden = h;
                        pose_from_6dof(&d)
                    }
                    Err(e) => {
                        shared.fail(e);
                        close_all();
                        break;
                    }
                };
                if !delay.is_zero() {
                    std::thread::sleep(delay);
                }
                latencies.push(t0.elapsed());
                let update = MotionUpdate {
                    frame_index: frame.frame_index,
                    t_prev: frame.t_prev,
                    t_curr: frame.t_curr,
                    motion,
                    arrived: frame.arrived,
                };
                if !offer(&q_motion, update, mode) {
                    break;
                }
            }
            q_motion.close();
            latencies
        });

        let sink = scope.spawn(|| {
            let mut latencies = Vec::new();
            let mut end_to_end = Vec::new();
            let mut uplink = cfg.uplink.as_deref().map(UplinkClient::new);
            let mut motions: Vec<(f64, PoseSE3)> = Vec::new();
            let mut origin_time = None;
            let mut pose = PoseSE3::identity();
            let mut messages = Vec::new();
            while let Some(update) = q_motion.pop() {
                let t0 = Instant::now();
                origin_time.get_or_insert(update.t_prev);
                pose = pose.compose(&update.motion);
                motions.push((update.t_curr, update.motion));
                let msg = PoseMessage::from_pose(update.frame_index as u32, update.t_curr, &pose);
                if let Some(client) = uplink.as_mut() {
                    if let Err(e) = client.send(&msg) {
                        log::debug!("uplink: {e}");
                    }
                }
                messages.push(msg);
                latencies.push(t0.elapsed());
                end_to_end.push(update.arrived.elapsed());
            }
            if let Some(client) = &uplink {
                if client.failed() > 0 {
                    log::warn!(
                        "uplink {}: {} of {} poses not delivered",
                        client.addr(),
                        client.failed(),
                        client.failed() + client.sent()
                    );
                }
            }
            (origin_time, motions, messages, latencies, end_to_end)
        });

        (
            ingest.join().expect("ingest thread"),
            imaging.join().expect("imaging thread"),
            inference.join().expect("inference thread"),
            sink.join().expect("accumulate thread"),
        )
    });
    let wall = started.elapsed().as_secs_f64();

    if let Some(e) = shared.error.into_inner().expect("error lock") {
        return Err(e);
    }
    let (offered, ingest_lat) = ingest;
    let (origin_time, motions, messages, uplink_lat, end_to_end) = sink;
    let trajectory = match origin_time {
        Some(t) => crate::se3::accumulate(PoseSE3::identity(), t, &motions)?,
        None => Trajectory::new(),
    };

    let processed = motions.len();
    let dropped = q_sync.evicted() + q_image.evicted() + q_motion.evicted();
    let (latency_ingest_mean_s, latency_ingest_p95_s) = summarize(&ingest_lat);
    let (latency_imaging_mean_s, latency_imaging_p95_s) = summarize(&imaging);
    let (latency_inference_mean_s, latency_inference_p95_s) = summarize(&inference);
    let (latency_uplink_mean_s, latency_uplink_p95_s) = summarize(&uplink_lat);
    let stats = PipelineStats {
        offered,
        processed,
        dropped,
        wall_time_s: wall,
        fps: if wall > 0.0 { processed as f64 / wall } else { 0.0 },
        latency_ingest_mean_s,
        latency_ingest_p95_s,
        latency_imaging_mean_s,
        latency_imaging_p95_s,
        latency_inference_mean_s,
        latency_inference_p95_s,
        latency_uplink_mean_s,
        latency_uplink_p95_s,
        latency_end_to_end_mean_s: summarize(&end_to_end).0,
        max_queue_occupancy: q_sync.high_water().max(q_image.high_water()).max(q_motion.high_water()),
        queue_capacity: cfg.queue_capacity,
    };
    Ok(PipelineOutput {
        trajectory,
        stats,
        messages,
    })
}

/// Replays a recorded sequence, paced when `cfg.mode` is real-time.
pub fn run_sequence(seq: &Sequence, params: &ModelParams, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let source = ReplaySource::from_sequence(seq);
    match cfg.mode {
        Mode::Offline => run_pipeline(source, params, cfg),
        Mode::Realtime => run_pipeline(source.paced(cfg.replay_speed), params, cfg),
    }
}
