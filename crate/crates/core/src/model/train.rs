use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{initial_hidden, Recording};
use super::params::{ModelConfig, ModelParams};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::se3::SixDof;
use crate::sim::ImuSample;

/// One supervised frame pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    /// `[2, H, W]` stacked previous/current panoramic images.
    pub pair: Tensor,
    pub imu: Vec<ImuSample>,
    /// Ground-truth motion in the previous frame's body frame.
    pub target: SixDof,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Truncated-BPTT windows per parameter update.
    pub batch_size: usize,
    /// Weight of the rotation term in the loss.
    pub lambda: f64,
    pub rng_seed: u64,
    /// Multiplier on the `1/sqrt(fan_in)` initialization bound.
    pub init_scale: f64,
    pub momentum: f64,
    /// Frame pairs per truncated-BPTT window.
    pub bptt_window: usize,
    /// Optional global gradient-norm clip.
    pub grad_clip: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 50,
            batch_size: 4,
            lambda: 100.0,
            rng_seed: 0,
            init_scale: 1.0,
            momentum: 0.9,
            bptt_window: 4,
            grad_clip: Some(10.0),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be >= 0".into()));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidConfig("lambda must be > 0".into()));
        }
        if self.batch_size == 0 || self.bptt_window == 0 {
            return Err(Error::InvalidConfig("batch_size and bptt_window must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig("momentum must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainingOutcome {
    pub params: ModelParams,
    /// Mean per-pair loss of each epoch, measured during the epoch.
    pub loss_curve: Vec<f64>,
}

/// Initializes a model from `cfg.rng_seed` and trains it.
pub fn train(dataset: &[Vec<Sample>], model: ModelConfig, cfg: &TrainingConfig) -> Result<TrainingOutcome> {
    let params = ModelParams::init(model, cfg.rng_seed, cfg.init_scale);
    train_params(params, dataset, cfg)
}

struct Sgd {
    velocity: Vec<Vec<f64>>,
    acc: Vec<Vec<f64>>,
    pairs: usize,
    windows: usize,
}

impl Sgd {
    fn new(params: &ModelParams) -> Self {
        let zeros = || params.tensors().iter().map(|t| vec![0.0; t.len()]).collect::<Vec<_>>();
        Self {
            velocity: zeros(),
            acc: zeros(),
            pairs: 0,
            windows: 0,
        }
    }

    fn accumulate(&mut self, params: &ModelParams, pairs: usize) {
        for (acc, t) in self.acc.iter_mut().zip(params.tensors()) {
            acc.iter_mut().zip(t.grad()).for_each(|(a, g)| *a += g);
        }
        self.pairs += pairs;
        self.windows += 1;
    }

    fn step(&mut self, params: &mut ModelParams, cfg: &TrainingConfig) {
        if self.pairs == 0 {
            return;
        }
        let inv = 1.0 / self.pairs as f64;
        let mut scale = inv;
        if let Some(clip) = cfg.grad_clip {
            let norm = self.acc.iter().flatten().map(|g| (g * inv).powi(2)).sum::<f64>().sqrt();
            if norm > clip {
                scale *= clip / norm;
            }
        }
        for ((t, v), acc) in params.tensors_mut().iter_mut().zip(&mut self.velocity).zip(&mut self.acc) {
            for ((w, vi), a) in t.data_mut().iter_mut().zip(v.iter_mut()).zip(acc.iter_mut()) {
                *vi = cfg.momentum * *vi + *a * scale;
                *w -= cfg.learning_rate * *vi;
                *a = 0.0;
            }
        }
        self.pairs = 0;
        self.windows = 0;
    }
}

/// Mini-batch SGD with momentum and truncated backpropagation through time.
///
/// The temporal hidden state is threaded through each sequence in order and
/// reset at sequence boundaries; gradients flow back at most
/// `bptt_window` pairs. Sequence order is reshuffled every epoch from
/// `rng_seed`, so two runs with the same inputs are bit-identical.
pub fn train_params(mut params: ModelParams, dataset: &[Vec<Sample>], cfg: &TrainingConfig) -> Result<TrainingOutcome> {
    cfg.validate()?;
    if dataset.iter().all(Vec::is_empty) {
        return Err(Error::EmptyDataset);
    }
    let mut opt = Sgd::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ 0x74_72_61_69_6e);
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..dataset.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut total, mut count) = (0.0, 0usize);
        for &s in &order {
            let mut hidden = initial_hidden();
            for window in dataset[s].chunks(cfg.bptt_window) {
                let mut rec = Recording::new();
                for sample in window {
                    let (_, h) = rec.step(&params, &sample.pair, &sample.imu, &hidden)?;
                    total += rec.attach_loss(&sample.target, cfg.lambda, 1.0)?;
                    count += 1;
                    hidden = h;
                }
                rec.backward(&mut params)?;
                opt.accumulate(&params, window.len());
                if opt.windows == cfg.batch_size {
                    opt.step(&mut params, cfg);
                }
            }
        }
        opt.step(&mut params, cfg);
        let mean = total / count as f64;
        if !mean.is_finite() || !params.is_finite() {
            return Err(Error::DivergedLoss { epoch: epoch + 1 });
        }
        log::debug!("epoch {} mean loss {mean:.6}", epoch + 1);
        curve.push(mean);
    }
    Ok(TrainingOutcome {
        params,
        loss_curve: curve,
    })
}

/// `epoch,mean_loss` CSV, epochs numbered from 1.
pub fn loss_curve_csv(curve: &[f64]) -> String {
    let mut s = String::from("epoch,mean_loss\n");
    for (i, l) in curve.iter().enumerate() {
        s.push_str(&format!("{},{}\n", i + 1, crate::fmt::sig9(*l)));
    }
    s
}
