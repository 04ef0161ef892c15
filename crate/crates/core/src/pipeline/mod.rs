//! Streaming runtime: synchronization, staged processing, pose uplink.

mod codec;
mod frame;
mod queue;
mod runtime;
mod sink;
mod stats;
mod sync;
mod uplink;

pub use codec::{decode_pose, encode_pose, PoseMessage, FRAME_LEN, MAGIC};
pub use frame::{hold_window, ImagedFrame, MotionUpdate};
pub use queue::{BoundedQueue, Coalesce};
pub use runtime::{run_pipeline, run_sequence, Mode, PipelineConfig, PipelineOutput, ReplaySource, SensorSource};
pub use sink::{serve_sink, ConnectionReport, SinkHandle, SINK_CSV_HEADER};
pub use stats::PipelineStats;
pub use sync::{merge_streams, synchronize, SensorEvent, SyncedFrame, Synchronizer};
pub use uplink::{UplinkClient, UPLINK_ENV};
