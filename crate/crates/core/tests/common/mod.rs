#![allow(dead_code)]

use mio_odometry::dataset::samples_from_sequence;
use mio_odometry::imaging::ImagingConfig;
use mio_odometry::model::{infer_pair, initial_hidden, loss, ModelConfig, ModelParams, Recording, Sample};
use mio_odometry::sim::{simulate, Floorplan, MotionScript, Sequence, SensorNoiseConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const LAMBDA: f64 = 100.0;

/// A default-noise walk along a jittered built-in route.
pub fn walk(route: &[[f64; 2]], duration: f64, seed: u64) -> Sequence {
    let plan = Floorplan::apartment();
    let path = MotionScript::jittered_path(route, &plan, 0.3, seed);
    let script = MotionScript::walk(&path, duration, 1.0, 1.5).expect("route fits duration");
    simulate(&plan, &script, &SensorNoiseConfig::default().with_seed(seed)).expect("simulation")
}

pub fn samples(seq: &Sequence) -> Vec<Sample> {
    samples_from_sequence(seq, &ImagingConfig::default()).expect("samples")
}

/// Summed loss of a window run from the zero hidden state.
pub fn window_loss(params: &ModelParams, window: &[Sample]) -> f64 {
    let mut h = initial_hidden();
    let mut total = 0.0;
    for s in window {
        let (pred, next) = infer_pair(&s.pair, &s.imu, &h, params).expect("forward");
        total += loss(&pred, &s.target, LAMBDA);
        h = next;
    }
    total
}

/// Summed window loss plus the ReLU pattern it was computed on.
pub fn window_eval(params: &ModelParams, window: &[Sample]) -> (f64, Vec<bool>) {
    let mut rec = Recording::new();
    let mut h = initial_hidden();
    let mut total = 0.0;
    for s in window {
        let (_, next) = rec.step(params, &s.pair, &s.imu, &h).expect("forward");
        total += rec.attach_loss(&s.target, LAMBDA, 1.0).expect("loss");
        h = next;
    }
    (total, rec.relu_pattern())
}

#[derive(Debug)]
pub struct TensorCheck {
    pub name: &'static str,
    pub checked: usize,
    /// Elements whose difference stencil switched a ReLU on or off; the
    /// loss is not differentiable across that step, so they are skipped.
    pub kinked: usize,
    /// `‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖)` over the checked
    /// elements; zero when both vanish.
    pub rel_err: f64,
}

/// Central finite differences against backprop over a recorded window.
///
/// Tensors with at most `max_per_tensor` elements are checked exhaustively;
/// larger ones on their largest-gradient quarter plus a random sample.
pub fn gradient_check(params: &ModelParams, window: &[Sample], step: f64, max_per_tensor: usize, seed: u64) -> Vec<TensorCheck> {
    gradient_check_with(params, window, step, max_per_tensor, seed, |_, _| {})
}

/// Same as [`gradient_check`] but lets the caller edit each analytic
/// gradient before comparison, to prove the check can fail.
pub fn gradient_check_with(
    params: &ModelParams,
    window: &[Sample],
    step: f64,
    max_per_tensor: usize,
    seed: u64,
    mut tamper: impl FnMut(&str, &mut Vec<f64>),
) -> Vec<TensorCheck> {
    let mut params = params.clone();
    let mut rec = Recording::new();
    let mut h = initial_hidden();
    for s in window {
        let (_, next) = rec.step(&params, &s.pair, &s.imu, &h).expect("forward");
        rec.attach_loss(&s.target, LAMBDA, 1.0).expect("loss");
        h = next;
    }
    rec.backward(&mut params).expect("backward");
    let base_pattern = rec.relu_pattern();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 0..params.tensors().len() {
        let mut grad = params.tensors()[i].grad().to_vec();
        tamper(ModelParams::name(i), &mut grad);
        let n = grad.len();
        let indices: Vec<usize> = if n <= max_per_tensor {
            (0..n).collect()
        } else {
            let mut by_mag: Vec<usize> = (0..n).collect();
            by_mag.sort_by(|&a, &b| grad[b].abs().total_cmp(&grad[a].abs()));
            let mut pick: Vec<usize> = by_mag[..max_per_tensor / 4].to_vec();
            let mut rest = by_mag[max_per_tensor / 4..].to_vec();
            rest.shuffle(&mut rng);
            pick.extend_from_slice(&rest[..max_per_tensor - pick.len()]);
            pick
        };
        let (mut diff2, mut a2, mut n2) = (0.0, 0.0, 0.0);
        let mut kinked = 0;
        for &j in &indices {
            let orig = params.tensors()[i].data()[j];
            params.tensors_mut()[i].data_mut()[j] = orig + step;
            let (lp, pp) = window_eval(&params, window);
            params.tensors_mut()[i].data_mut()[j] = orig - step;
            let (lm, pm) = window_eval(&params, window);
            params.tensors_mut()[i].data_mut()[j] = orig;
            if pp != base_pattern || pm != base_pattern {
                kinked += 1;
                continue;
            }
            let numeric = (lp - lm) / (2.0 * step);
            diff2 += (grad[j] - numeric).powi(2);
            a2 += grad[j] * grad[j];
            n2 += numeric * numeric;
        }
        let denom = a2.sqrt().max(n2.sqrt());
        out.push(TensorCheck {
            name: ModelParams::name(i),
            checked: indices.len() - kinked,
            kinked,
            rel_err: if denom < 1e-12 { 0.0 } else { diff2.sqrt() / denom },
        });
    }
    out
}

pub fn toy_model(seed: u64) -> ModelParams {
    ModelParams::init(ModelConfig::default(), seed, 1.0)
}
