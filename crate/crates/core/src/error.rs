use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gimbal lock: pitch {pitch} rad is within 1e-6 of +/-pi/2")]
    GimbalLock { pitch: f64 },

    #[error("timestamps are not strictly increasing at index {index}")]
    NonMonotonicTimestamps { index: usize },

    #[error("waypoint {index} at ({x}, {y}) lies outside the floorplan bounds")]
    WaypointOutsideBounds { index: usize, x: f64, y: f64 },

    #[error("path segment {index} crosses wall {wall}")]
    PathCrossesWall { index: usize, wall: usize },

    #[error("sensor pose ({x}, {y}) lies outside the floorplan bounds")]
    PoseOutsideBounds { x: f64, y: f64 },

    #[error("trajectory too short: need at least {needed} entries, got {got}")]
    TrajectoryTooShort { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input")]
    EmptyInput,

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },

    #[error("IMU window is empty")]
    EmptyWindow,

    #[error("backward called without a recorded forward pass and loss")]
    GraphNotRecorded,

    #[error("training dataset is empty")]
    EmptyDataset,

    #[error("loss diverged (non-finite) at epoch {epoch}")]
    DivergedLoss { epoch: usize },

    #[error("checkpoint does not match runtime configuration: {0}")]
    CheckpointMismatch(String),

    #[error("malformed checkpoint: {0}")]
    BadCheckpoint(String),

    #[error("uplink unavailable: {0}")]
    UplinkUnavailable(String),

    #[error("bad frame magic {0:02x?}")]
    BadMagic([u8; 2]),

    #[error("truncated frame: {got} of {expected} bytes")]
    TruncatedFrame { expected: usize, got: usize },

    #[error("failed to bind {addr}: {source}")]
    BindFailure {
        addr: String,
        #[source]
        source: std::io::Error,
    },

    #[error("stream {stream} went backwards in time at t = {t}")]
    NonMonotonicStream { stream: &'static str, t: f64 },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("no temporal overlap between estimate and ground truth")]
    NoTemporalOverlap,

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("pipeline stage failed: {0}")]
    Pipeline(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
