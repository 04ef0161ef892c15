//! Trains the fusion network on three simulated walks, then compares it with
//! IMU dead reckoning on a held-out walk.
//!
//! cargo run --release --example train_model -- [epochs] [checkpoint]

use mio_odometry::dataset::samples_from_sequence;
use mio_odometry::eval::{ate, imu_dead_reckoning};
use mio_odometry::imaging::ImagingConfig;
use mio_odometry::model::{checkpoint, train, ModelConfig, TrainingConfig};
use mio_odometry::pipeline::{run_sequence, PipelineConfig};
use mio_odometry::sim::{routes, simulate, Floorplan, MotionScript, Sequence, SensorNoiseConfig};

fn walk(route: &[[f64; 2]], seconds: f64, seed: u64) -> mio_odometry::Result<Sequence> {
    let plan = Floorplan::apartment();
    let path = MotionScript::jittered_path(route, &plan, 0.3, seed);
    simulate(&plan, &MotionScript::walk(&path, seconds, 1.0, 1.5)?, &SensorNoiseConfig::default().with_seed(seed))
}

fn main() -> mio_odometry::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().map(|s| s.parse().expect("epochs must be an integer")).unwrap_or(20);
    let out = args.next().unwrap_or_else(|| "target/model.mio".into());

    let imaging = ImagingConfig::default();
    let mut dataset = Vec::new();
    for (k, route) in [routes::SWEEP_ALL, routes::LIVING_LOOP, routes::EAST_BEDROOM].into_iter().enumerate() {
        dataset.push(samples_from_sequence(&walk(route, 60.0, 10 + k as u64)?, &imaging)?);
    }
    let cfg = TrainingConfig {
        epochs,
        rng_seed: 1,
        ..TrainingConfig::default()
    };
    let outcome = train(&dataset, ModelConfig::default(), &cfg)?;
    for (e, l) in outcome.loss_curve.iter().enumerate() {
        println!("epoch {:>3}  loss {l:.5}", e + 1);
    }
    checkpoint::save(&outcome.params, &out)?;
    println!("saved {out}");

    let test = walk(routes::WEST_BEDROOM, 60.0, 99)?;
    let fused = run_sequence(&test, &outcome.params, &PipelineConfig::default())?;
    let origin = test.truth.first().expect("truth").1;
    let dr = imu_dead_reckoning(&test.imu, origin)?;
    // the pipeline starts at the identity; put it on the truth start
    let placed = mio_odometry::Trajectory::from_entries(
        fused.trajectory.entries().iter().map(|(t, p)| (*t, origin.compose(p))).collect(),
    )?;
    println!("held-out ATE rmse: fused {:.3} m, dead reckoning {:.3} m", ate(&placed, &test.truth)?.rmse, ate(&dr, &test.truth)?.rmse);
    Ok(())
}
