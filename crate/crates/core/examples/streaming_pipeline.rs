//! Runs the threaded pipeline over one walk twice: offline (lossless) and
//! real time with a deliberately slow model, and prints the stats of both.
//!
//! cargo run --release --example streaming_pipeline -- [inference_delay_s]

use mio_odometry::model::{ModelConfig, ModelParams};
use mio_odometry::pipeline::{run_sequence, Mode, PipelineConfig};
use mio_odometry::sim::{routes, simulate, Floorplan, MotionScript, SensorNoiseConfig};

fn main() -> mio_odometry::Result<()> {
    let delay: f64 = std::env::args().nth(1).map(|s| s.parse().expect("delay in seconds")).unwrap_or(0.25);
    let plan = Floorplan::apartment();
    let script = MotionScript::walk(routes::LIVING_LOOP, 20.0, 1.0, 1.5)?;
    let seq = simulate(&plan, &script, &SensorNoiseConfig::default().with_seed(2))?;
    let params = ModelParams::init(ModelConfig::default(), 5, 1.0);

    let offline = run_sequence(&seq, &params, &PipelineConfig::default())?;
    println!("offline\n{}", offline.stats.to_json());

    let live = PipelineConfig {
        mode: Mode::Realtime,
        inference_delay_s: delay,
        ..PipelineConfig::default()
    };
    let out = run_sequence(&seq, &params, &live)?;
    println!("real time, {delay} s per inference\n{}", out.stats.to_json());
    let gaps = out.messages.windows(2).filter(|w| w[1].seq > w[0].seq + 1).count();
    println!("{} poses emitted, {gaps} gaps in the frame sequence", out.messages.len());
    Ok(())
}
