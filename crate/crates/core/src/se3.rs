//! Rigid-body pose algebra.
//!
//! Poses are stored as a unit quaternion plus a translation. Every public
//! constructor and operation renormalizes the quaternion and flips it into the
//! `w >= 0` hemisphere, so two poses describing the same transform compare
//! equal component-wise.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::fmt::sig9;

/// Distance from `±π/2` pitch under which euler extraction is refused.
pub const GIMBAL_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseSE3 {
    rotation: UnitQuaternion<f64>,
    translation: Vector3<f64>,
}

impl Default for PoseSE3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl PoseSE3 {
    pub fn identity() -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose from raw quaternion components `(w, x, y, z)`; the
    /// quaternion is normalized and canonicalized.
    pub fn new(q: [f64; 4], translation: Vector3<f64>) -> Self {
        Self::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]), translation)
    }

    pub fn from_quaternion(q: Quaternion<f64>, translation: Vector3<f64>) -> Self {
        let q = if q.w < 0.0 { -q } else { q };
        Self {
            rotation: UnitQuaternion::new_normalize(q),
            translation,
        }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: t,
        }
    }

    /// Pure rotation about +z.
    pub fn from_yaw(yaw: f64) -> Self {
        Self::from_yaw_translation(yaw, Vector3::zeros())
    }

    pub fn from_yaw_translation(yaw: f64, t: Vector3<f64>) -> Self {
        let h = 0.5 * yaw;
        Self::new([h.cos(), 0.0, 0.0, h.sin()], t)
    }

    pub fn rotation(&self) -> &UnitQuaternion<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// `(w, x, y, z)`.
    pub fn quaternion(&self) -> [f64; 4] {
        let q = self.rotation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    /// `self` followed by `other`, with `other` expressed in `self`'s frame.
    pub fn compose(&self, other: &PoseSE3) -> PoseSE3 {
        let q = self.rotation.quaternion() * other.rotation.quaternion();
        let t = self.translation + self.rotation * other.translation;
        Self::from_quaternion(q, t)
    }

    pub fn invert(&self) -> PoseSE3 {
        let inv = self.rotation.inverse();
        let t = -(inv * self.translation);
        Self::from_quaternion(*inv.quaternion(), t)
    }

    pub fn transform_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * x + self.translation
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Motion from `self` to `other` expressed in `self`'s body frame.
    pub fn relative_to(&self, other: &PoseSE3) -> PoseSE3 {
        self.invert().compose(other)
    }

    /// Rotation angle in `[0, π]`.
    pub fn rotation_angle(&self) -> f64 {
        let w = self.rotation.quaternion().w.abs().min(1.0);
        let v = self.rotation.quaternion().imag().norm();
        2.0 * v.atan2(w)
    }

    pub fn yaw(&self) -> f64 {
        let [w, x, y, z] = self.quaternion();
        (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z))
    }
}

/// Translation plus Z-Y-X intrinsic (yaw, pitch, roll) euler angles; the
/// network's 6-scalar output format.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SixDof {
    pub translation: [f64; 3],
    /// `[roll, pitch, yaw]` in radians.
    pub euler: [f64; 3],
}

impl SixDof {
    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            translation: [v[0], v[1], v[2]],
            euler: [v[3], v[4], v[5]],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        let t = self.translation;
        let e = self.euler;
        [t[0], t[1], t[2], e[0], e[1], e[2]]
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

pub fn pose_from_6dof(d: &SixDof) -> PoseSE3 {
    let [roll, pitch, yaw] = d.euler;
    let (sr, cr) = (0.5 * roll).sin_cos();
    let (sp, cp) = (0.5 * pitch).sin_cos();
    let (sy, cy) = (0.5 * yaw).sin_cos();
    // q = q_z(yaw) * q_y(pitch) * q_x(roll)
    let q = [
        cy * cp * cr + sy * sp * sr,
        cy * cp * sr - sy * sp * cr,
        cy * sp * cr + sy * cp * sr,
        sy * cp * cr - cy * sp * sr,
    ];
    PoseSE3::new(q, Vector3::from(d.translation))
}

pub fn sixdof_from_pose(p: &PoseSE3) -> Result<SixDof> {
    use std::f64::consts::FRAC_PI_2;
    let [w, x, y, z] = p.quaternion();
    let sin_pitch = (2.0 * (w * y - z * x)).clamp(-1.0, 1.0);
    let cos_pitch = ((1.0 - 2.0 * (x * x + y * y)).powi(2) + (2.0 * (w * x + y * z)).powi(2)).sqrt();
    let pitch = sin_pitch.atan2(cos_pitch);
    if (pitch.abs() - FRAC_PI_2).abs() < GIMBAL_EPS {
        return Err(Error::GimbalLock { pitch });
    }
    let roll = (2.0 * (w * x + y * z)).atan2(1.0 - 2.0 * (x * x + y * y));
    let yaw = (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z));
    let t = p.translation();
    Ok(SixDof {
        translation: [t.x, t.y, t.z],
        euler: [wrap_angle(roll), pitch, wrap_angle(yaw)],
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    entries: Vec<(f64, PoseSE3)>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<(f64, PoseSE3)>) -> Result<Self> {
        for (i, w) in entries.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::NonMonotonicTimestamps { index: i + 1 });
            }
        }
        Ok(Self { entries })
    }

    pub fn push(&mut self, t: f64, pose: PoseSE3) -> Result<()> {
        if let Some(&(last, _)) = self.entries.last() {
            if !(t > last) {
                return Err(Error::NonMonotonicTimestamps {
                    index: self.entries.len(),
                });
            }
        }
        self.entries.push((t, pose));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(f64, PoseSE3)] {
        &self.entries
    }

    pub fn timestamps(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn poses(&self) -> impl Iterator<Item = &PoseSE3> + '_ {
        self.entries.iter().map(|e| &e.1)
    }

    pub fn first(&self) -> Option<&(f64, PoseSE3)> {
        self.entries.first()
    }

    pub fn last(&self) -> Option<&(f64, PoseSE3)> {
        self.entries.last()
    }

    /// Index of the entry whose timestamp is closest to `t`.
    pub fn nearest_index(&self, t: f64) -> Option<usize> {
        if self.entries.is_empty() {
            return None;
        }
        let i = self.entries.partition_point(|e| e.0 < t);
        let candidates = [i.checked_sub(1), (i < self.entries.len()).then_some(i)];
        candidates
            .into_iter()
            .flatten()
            .min_by(|&a, &b| {
                let da = (self.entries[a].0 - t).abs();
                let db = (self.entries[b].0 - t).abs();
                da.total_cmp(&db)
            })
    }

    /// Pose at the nearest timestamp if it lies within `tolerance` of `t`.
    pub fn pose_near(&self, t: f64, tolerance: f64) -> Option<&PoseSE3> {
        let i = self.nearest_index(t)?;
        let (ti, ref p) = self.entries[i];
        ((ti - t).abs() <= tolerance).then_some(p)
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("t,x,y,z,qw,qx,qy,qz\n");
        for (t, p) in &self.entries {
            let tr = p.translation();
            let q = p.quaternion();
            let fields = [*t, tr.x, tr.y, tr.z, q[0], q[1], q[2], q[3]];
            let row: Vec<String> = fields.iter().map(|&v| sig9(v)).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(path, "missing header"))?;
        if header.trim() != "t,x,y,z,qw,qx,qy,qz" {
            return Err(Error::parse(path, format!("unexpected header `{header}`")));
        }
        let mut entries = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v = parse_row::<8>(&line).map_err(|m| Error::parse(path, format!("line {}: {m}", lineno + 2)))?;
            let pose = PoseSE3::new([v[4], v[5], v[6], v[7]], Vector3::new(v[1], v[2], v[3]));
            entries.push((v[0], pose));
        }
        Self::from_entries(entries)
    }
}

pub(crate) fn parse_row<const N: usize>(line: &str) -> std::result::Result<[f64; N], String> {
    let mut out = [0.0; N];
    let mut fields = line.trim_end_matches('\r').split(',');
    for slot in out.iter_mut() {
        let f = fields.next().ok_or_else(|| format!("expected {N} fields"))?;
        *slot = f.trim().parse().map_err(|e| format!("bad number `{f}`: {e}"))?;
    }
    if fields.next().is_some() {
        return Err(format!("expected {N} fields"));
    }
    Ok(out)
}

/// Chains relative motions onto `origin`. The first relative motion is
/// applied at its own timestamp; `origin` sits at `origin_time`.
pub fn accumulate(origin: PoseSE3, origin_time: f64, rel_motions: &[(f64, PoseSE3)]) -> Result<Trajectory> {
    let mut traj = Trajectory::new();
    traj.push(origin_time, origin)?;
    let mut current = origin;
    for (t, rel) in rel_motions {
        current = current.compose(rel);
        traj.push(*t, current)?;
    }
    Ok(traj)
}
