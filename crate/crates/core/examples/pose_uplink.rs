//! Starts a pose sink on a free local port, streams a walk through the
//! pipeline into it and prints what the sink recorded.

use std::time::Duration;

use mio_odometry::model::{ModelConfig, ModelParams};
use mio_odometry::pipeline::{run_sequence, serve_sink, PipelineConfig};
use mio_odometry::sim::{routes, simulate, Floorplan, MotionScript, SensorNoiseConfig};

fn main() -> mio_odometry::Result<()> {
    let dir = std::env::temp_dir().join(format!("mio-sink-{}", std::process::id()));
    let sink = serve_sink("127.0.0.1:0", &dir)?;
    println!("sink on {}, writing to {}", sink.local_addr(), dir.display());

    let plan = Floorplan::apartment();
    let script = MotionScript::walk(routes::EAST_BEDROOM, 15.0, 1.0, 1.5)?;
    let seq = simulate(&plan, &script, &SensorNoiseConfig::default().with_seed(4))?;
    let cfg = PipelineConfig {
        uplink: Some(sink.local_addr().to_string()),
        ..PipelineConfig::default()
    };
    let out = run_sequence(&seq, &ModelParams::init(ModelConfig::default(), 2, 1.0), &cfg)?;
    println!("pipeline emitted {} poses", out.messages.len());

    for r in sink.wait_closed(1, Duration::from_secs(5)) {
        let text = std::fs::read_to_string(&r.path)?;
        println!("{}: {} poses", r.path.display(), r.frames);
        for line in text.lines().take(4) {
            println!("  {line}");
        }
    }
    Ok(())
}
