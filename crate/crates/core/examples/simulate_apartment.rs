//! Simulates a one-minute walk through the apartment and writes it to disk.
//!
//! cargo run --example simulate_apartment -- [out_dir] [seed]

use mio_odometry::sim::{record_sequence, routes, Floorplan, MotionScript, SensorNoiseConfig};

fn main() -> mio_odometry::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "target/sequences/apartment".into());
    let seed: u64 = args.next().map(|s| s.parse().expect("seed must be an integer")).unwrap_or(7);

    let plan = Floorplan::apartment();
    let path = MotionScript::jittered_path(routes::SWEEP_ALL, &plan, 0.3, seed);
    let script = MotionScript::walk(&path, 60.0, 1.0, 1.5)?;
    let seq = record_sequence(&plan, &script, &SensorNoiseConfig::default().with_seed(seed), &out)?;

    let points: usize = seq.scans.iter().map(|s| s.points.len()).sum();
    let (_, start) = seq.truth.first().expect("non-empty");
    let (_, end) = seq.truth.last().expect("non-empty");
    println!("sequence     {out}");
    println!("radar frames {}", seq.scans.len());
    println!("imu samples  {}", seq.imu.len());
    println!("points/s     {:.1}", points as f64 / seq.meta.duration);
    println!(
        "walk         ({:.2}, {:.2}) -> ({:.2}, {:.2})",
        start.translation().x,
        start.translation().y,
        end.translation().x,
        end.translation().y
    );
    Ok(())
}
