//! 70-byte little-endian pose frame:
//! `"MP"` | seq `u32` | timestamp `f64` | translation `3×f64` | quaternion `4×f64 (w,x,y,z)`.

use crate::error::{Error, Result};
use crate::se3::PoseSE3;

pub const MAGIC: [u8; 2] = *b"MP";
pub const FRAME_LEN: usize = 2 + 4 + 8 + 24 + 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseMessage {
    pub seq: u32,
    pub timestamp: f64,
    pub translation: [f64; 3],
    pub rotation: [f64; 4],
}

impl PoseMessage {
    pub fn from_pose(seq: u32, timestamp: f64, pose: &PoseSE3) -> Self {
        let t = pose.translation();
        Self {
            seq,
            timestamp,
            translation: [t.x, t.y, t.z],
            rotation: pose.quaternion(),
        }
    }

    pub fn to_pose(&self) -> PoseSE3 {
        PoseSE3::new(self.rotation, self.translation.into())
    }

    /// Quaternion norm within 1e-6 of one.
    pub fn is_valid(&self) -> bool {
        let n = self.rotation.iter().map(|v| v * v).sum::<f64>().sqrt();
        (n - 1.0).abs() <= 1e-6
    }
}

pub fn encode_pose(msg: &PoseMessage) -> [u8; FRAME_LEN] {
    let mut out = [0u8; FRAME_LEN];
    out[..2].copy_from_slice(&MAGIC);
    out[2..6].copy_from_slice(&msg.seq.to_le_bytes());
    let floats = std::iter::once(msg.timestamp).chain(msg.translation).chain(msg.rotation);
    for (i, v) in floats.enumerate() {
        let at = 6 + 8 * i;
        out[at..at + 8].copy_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_pose(bytes: &[u8]) -> Result<PoseMessage> {
    if bytes.len() >= 2 && bytes[..2] != MAGIC {
        return Err(Error::BadMagic([bytes[0], bytes[1]]));
    }
    if bytes.len() < FRAME_LEN {
        return Err(Error::TruncatedFrame {
            expected: FRAME_LEN,
            got: bytes.len(),
        });
    }
    let f = |i: usize| {
        let at = 6 + 8 * i;
        f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
    };
    Ok(PoseMessage {
        seq: u32::from_le_bytes(bytes[2..6].try_into().expect("4 bytes")),
        timestamp: f(0),
        translation: [f(1), f(2), f(3)],
        rotation: [f(4), f(5), f(6), f(7)],
    })
}
