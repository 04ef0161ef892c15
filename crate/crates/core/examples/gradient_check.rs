//! Compares backprop gradients with central differences on a few weights
//! of every parameter tensor.

use mio_odometry::dataset::samples_from_sequence;
use mio_odometry::imaging::ImagingConfig;
use mio_odometry::model::{initial_hidden, ModelConfig, ModelParams, Recording, Sample, PARAM_NAMES};
use mio_odometry::sim::{routes, simulate, Floorplan, MotionScript, SensorNoiseConfig};

const LAMBDA: f64 = 100.0;
const STEP: f64 = 1e-5;

fn window_loss(params: &ModelParams, window: &[Sample]) -> mio_odometry::Result<f64> {
    let mut rec = Recording::new();
    let mut h = initial_hidden();
    let mut total = 0.0;
    for s in window {
        h = rec.step(params, &s.pair, &s.imu, &h)?.1;
        total += rec.attach_loss(&s.target, LAMBDA, 1.0)?;
    }
    Ok(total)
}

fn main() -> mio_odometry::Result<()> {
    let plan = Floorplan::apartment();
    let script = MotionScript::walk(routes::WEST_BEDROOM, 20.0, 1.0, 1.5)?;
    let seq = simulate(&plan, &script, &SensorNoiseConfig::default().with_seed(1))?;
    let samples = samples_from_sequence(&seq, &ImagingConfig::default())?;
    let window = &samples[30..33];

    let mut params = ModelParams::init(ModelConfig::default(), 1, 1.0);
    let mut rec = Recording::new();
    let mut h = initial_hidden();
    for s in window {
        h = rec.step(&params, &s.pair, &s.imu, &h)?.1;
        rec.attach_loss(&s.target, LAMBDA, 1.0)?;
    }
    rec.backward(&mut params)?;

    println!("{:<40} {:>12} {:>12} {:>10}", "tensor[largest grad]", "analytic", "numeric", "rel err");
    for i in 0..params.tensors().len() {
        let grad = params.tensors()[i].grad().to_vec();
        let j = (0..grad.len()).max_by(|&a, &b| grad[a].abs().total_cmp(&grad[b].abs())).unwrap_or(0);
        let orig = params.tensors()[i].data()[j];
        params.tensors_mut()[i].data_mut()[j] = orig + STEP;
        let lp = window_loss(&params, window)?;
        params.tensors_mut()[i].data_mut()[j] = orig - STEP;
        let lm = window_loss(&params, window)?;
        params.tensors_mut()[i].data_mut()[j] = orig;
        let numeric = (lp - lm) / (2.0 * STEP);
        let rel = (grad[j] - numeric).abs() / grad[j].abs().max(numeric.abs()).max(1e-12);
        println!("{:<40} {:>12.5e} {:>12.5e} {:>10.2e}", format!("{}[{j}]", PARAM_NAMES[i]), grad[j], numeric, rel);
    }
    Ok(())
}
