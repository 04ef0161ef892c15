//! On-disk sequence format.
//!
//! ```text
//! <dir>/meta.json          rates, sensor config, floorplan, script
//! <dir>/truth.csv          t,x,y,z,qw,qx,qy,qz
//! <dir>/imu.csv            t,gx,gy,gz,ax,ay,az
//! <dir>/radar/index.csv    frame,t,file
//! <dir>/radar/NNNNNN.csv   x,y,z,intensity
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::SensorNoiseConfig;
use super::floorplan::Floorplan;
use super::imu::{imu_stream, ImuSample};
use super::radar::{radar_scan, RadarPoint, RadarScan};
use super::script::{generate_trajectory, MotionScript};
use crate::error::{Error, Result};
use crate::fmt::{quantize9, sig9};
use crate::se3::{parse_row, Trajectory};

pub const SEQUENCE_FORMAT: &str = "mio-sequence";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceMeta {
    pub format: String,
    pub version: u32,
    pub imu_rate: f64,
    pub radar_rate: f64,
    pub duration: f64,
    pub sensor: SensorNoiseConfig,
    pub floorplan: Floorplan,
    pub script: MotionScript,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    pub meta: SequenceMeta,
    pub truth: Trajectory,
    pub imu: Vec<ImuSample>,
    pub scans: Vec<RadarScan>,
}

/// Runs the full simulation in memory.
pub fn simulate(plan: &Floorplan, script: &MotionScript, cfg: &SensorNoiseConfig) -> Result<Sequence> {
    cfg.validate()?;
    let truth = generate_trajectory(script, plan)?;
    let imu = imu_stream(&truth, cfg)?;
    let t0 = script.start_time();
    let frames = (script.duration() * script.radar_rate + 1e-9).floor() as usize;
    let scans = (0..frames)
        .map(|k| {
            let t = quantize9(t0 + k as f64 / script.radar_rate);
            radar_scan(plan, &script.pose_at(t), cfg, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = SequenceMeta {
        format: SEQUENCE_FORMAT.into(),
        version: 1,
        imu_rate: script.imu_rate,
        radar_rate: script.radar_rate,
        duration: script.duration(),
        sensor: cfg.clone(),
        floorplan: plan.clone(),
        script: script.clone(),
    };
    Ok(Sequence { meta, truth, imu, scans })
}

/// Simulates and writes a sequence directory at `path`.
pub fn record_sequence(
    plan: &Floorplan,
    script: &MotionScript,
    cfg: &SensorNoiseConfig,
    path: impl AsRef<Path>,
) -> Result<Sequence> {
    let seq = simulate(plan, script, cfg)?;
    seq.write(path)?;
    Ok(seq)
}

fn row(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&sig9(*v));
    }
    s.push('\n');
    s
}

fn read_table<const N: usize>(path: &Path, header: &str) -> Result<Vec<[f64; N]>> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.trim_end() != header {
        return Err(Error::parse(path, format!("expected header `{header}`, found `{first}`")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        rows.push(parse_row::<N>(&line).map_err(|m| Error::parse(path, format!("line {}: {m}", i + 2)))?);
    }
    Ok(rows)
}

impl Sequence {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let dir = path.as_ref();
        fs::create_dir_all(dir.join("radar"))?;
        fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&self.meta)? + "\n")?;
        self.truth.write_csv(dir.join("truth.csv"))?;

        let mut imu = String::from("t,gx,gy,gz,ax,ay,az\n");
        for s in &self.imu {
            let [gx, gy, gz] = s.gyro;
            let [ax, ay, az] = s.accel;
            imu.push_str(&row(&[s.timestamp, gx, gy, gz, ax, ay, az]));
        }
        fs::write(dir.join("imu.csv"), imu)?;

        let mut index = String::from("frame,t,file\n");
        for (k, scan) in self.scans.iter().enumerate() {
            let file = format!("{k:06}.csv");
            let _ = writeln!(index, "{k},{},{file}", sig9(scan.timestamp));
            let mut body = String::from("x,y,z,intensity\n");
            for p in &scan.points {
                let [x, y, z] = p.position;
                body.push_str(&row(&[x, y, z, p.intensity]));
            }
            fs::write(dir.join("radar").join(file), body)?;
        }
        fs::write(dir.join("radar").join("index.csv"), index)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let dir = path.as_ref();
        let meta_path = dir.join("meta.json");
        let meta: SequenceMeta = serde_json::from_str(&fs::read_to_string(&meta_path)?)?;
        if meta.format != SEQUENCE_FORMAT {
            return Err(Error::parse(meta_path, format!("unknown format `{}`", meta.format)));
        }
        let truth = Trajectory::read_csv(dir.join("truth.csv"))?;
        let imu = read_table::<7>(&dir.join("imu.csv"), "t,gx,gy,gz,ax,ay,az")?
            .into_iter()
            .map(|r| ImuSample {
                timestamp: r[0],
                gyro: [r[1], r[2], r[3]],
                accel: [r[4], r[5], r[6]],
            })
            .collect();

        let index_path = dir.join("radar").join("index.csv");
        let reader = BufReader::new(fs::File::open(&index_path)?);
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim_end() != "frame,t,file" {
            return Err(Error::parse(&index_path, "expected header `frame,t,file`"));
        }
        let mut scans = Vec::new();
        for line in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, ',');
            let (Some(_frame), Some(t), Some(file)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(&index_path, format!("malformed row `{line}`")));
            };
            let t: f64 = t.parse().map_err(|_| Error::parse(&index_path, format!("bad time `{t}`")))?;
            let points = read_table::<4>(&dir.join("radar").join(file.trim_end()), "x,y,z,intensity")?
                .into_iter()
                .map(|r| RadarPoint::new([r[0], r[1], r[2]], r[3]))
                .collect();
            scans.push(RadarScan::new(t, points));
        }
        Ok(Self { meta, truth, imu, scans })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{routes, Waypoint};

    #[test]
    fn write_then_read_is_bit_exact() {
        let plan = Floorplan::apartment();
        let script = MotionScript::walk(routes::WEST_BEDROOM, 6.0, 0.5, 20.0).unwrap();
        let cfg = SensorNoiseConfig::default().with_seed(5);
        let dir = tempfile::tempdir().unwrap();
        let seq = record_sequence(&plan, &script, &cfg, dir.path()).unwrap();
        let back = Sequence::read(dir.path()).unwrap();
        assert_eq!(back.meta, seq.meta);
        assert_eq!(back.scans.len(), 60);
        for (a, b) in seq.scans.iter().zip(&back.scans) {
            assert_eq!(a.timestamp.to_bits(), b.timestamp.to_bits());
            assert_eq!(a.points, b.points);
        }
        assert_eq!(back.imu, seq.imu);
        assert_eq!(back.truth.len(), seq.truth.len());
    }

    #[test]
    fn empty_script_is_too_short() {
        let dir = tempfile::tempdir().unwrap();
        let script = MotionScript::new(vec![Waypoint { t: 0.0, x: 1.0, y: 1.0, yaw: 0.0 }]);
        let err = record_sequence(&Floorplan::apartment(), &script, &SensorNoiseConfig::default(), dir.path());
        assert!(matches!(err, Err(Error::TrajectoryTooShort { .. })));
        let err = record_sequence(
            &Floorplan::apartment(),
            &MotionScript::new(vec![]),
            &SensorNoiseConfig::default(),
            dir.path(),
        );
        assert!(matches!(err, Err(Error::TrajectoryTooShort { .. })));
    }
}
