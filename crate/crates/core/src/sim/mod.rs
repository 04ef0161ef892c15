//! Ground-truth motion and sensor synthesis inside a 2.5D floorplan.

mod config;
mod floorplan;
mod imu;
mod radar;
mod script;
mod sequence;

pub use config::{RadarGeometry, SensorNoiseConfig};
pub use floorplan::{Bounds, Floorplan, Wall};
pub use imu::{imu_stream, ImuSample, GRAVITY};
pub use radar::{cast_ray, radar_scan, RadarPoint, RadarScan};
pub use script::{generate_trajectory, routes, MotionScript, Waypoint};
pub use sequence::{record_sequence, simulate, Sequence, SequenceMeta};

/// Mixes a seed with a stream discriminator (splitmix64 finalizer).
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
