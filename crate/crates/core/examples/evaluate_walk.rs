//! Scores IMU dead reckoning and a drifting odometry estimate against the
//! simulator's ground truth and writes a report with a trajectory plot.
//!
//! cargo run --example evaluate_walk -- [report_dir]

use mio_odometry::eval::{ate, imu_dead_reckoning, report, rpe};
use mio_odometry::se3::accumulate;
use mio_odometry::sim::{routes, simulate, Floorplan, MotionScript, SensorNoiseConfig};
use mio_odometry::PoseSE3;

fn main() -> mio_odometry::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/report".into());
    let plan = Floorplan::apartment();
    let script = MotionScript::walk(routes::SWEEP_ALL, 60.0, 1.0, 1.5)?;
    let seq = simulate(&plan, &script, &SensorNoiseConfig::default().with_seed(8))?;
    let (t0, origin) = *seq.truth.first().expect("truth");

    let dr = imu_dead_reckoning(&seq.imu, origin)?;
    for secs in [10.0, 20.0, 40.0, 60.0] {
        let (a, b) = (dr.pose_near(t0 + secs, 1e-6), seq.truth.pose_near(t0 + secs, 1e-6));
        if let (Some(a), Some(b)) = (a, b) {
            println!("dead reckoning error at {secs:>4} s: {:.2} m", (a.translation() - b.translation()).norm());
        }
    }

    // every radar-rate step of the truth, with a small yaw and scale error
    let frames: Vec<_> = seq.scans.iter().filter_map(|s| seq.truth.pose_near(s.timestamp, 1e-6).map(|p| (s.timestamp, *p))).collect();
    let steps: Vec<(f64, PoseSE3)> = frames
        .windows(2)
        .map(|w| {
            let rel = w[0].1.relative_to(&w[1].1);
            let bent = PoseSE3::from_quaternion(*rel.rotation().quaternion(), rel.translation() * 1.03);
            (w[1].0, bent.compose(&PoseSE3::from_yaw(0.002)))
        })
        .collect();
    let est = accumulate(frames[0].1, frames[0].0, &steps)?;
    println!("drifting estimate: ATE rmse {:.3} m, RPE(10) {:.3} m", ate(&est, &seq.truth)?.rmse, rpe(&est, &seq.truth, 10)?.trans_mean);

    let m = report(&est, &seq.truth, Some(&dr), 10, &out)?;
    println!("wrote {out}: {}", serde_json::to_string(&m).expect("metrics"));
    Ok(())
}
