use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const CONV_CHANNELS: [usize; 4] = [2, 8, 16, 32];
pub const IMU_INPUT: usize = 6;
pub const IMU_HIDDEN: usize = 32;
pub const TEMPORAL_HIDDEN: usize = 64;
pub const HEAD_WIDTHS: [usize; 3] = [64, 32, 6];

/// Image geometry the network is built for; every other size is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub height: usize,
    pub width: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { height: 16, width: 64 }
    }
}

impl ModelConfig {
    /// Spatial size after the three stride-2 convolutions.
    pub fn encoded_hw(&self) -> (usize, usize) {
        (self.height.div_ceil(8), self.width.div_ceil(8))
    }

    pub fn radar_features(&self) -> usize {
        let (h, w) = self.encoded_hw();
        CONV_CHANNELS[3] * h * w
    }

    pub fn fused_features(&self) -> usize {
        self.radar_features() + IMU_HIDDEN
    }
}

/// Index of each parameter tensor inside [`ModelParams`].
pub mod idx {
    pub const CONV_W: [usize; 3] = [0, 2, 4];
    pub const CONV_B: [usize; 3] = [1, 3, 5];
    pub const IMU_W_IN: usize = 6;
    pub const IMU_W_HH: usize = 7;
    pub const IMU_B: usize = 8;
    /// Produces the radar-feature mask from the inertial feature.
    pub const ATT_RADAR_W: usize = 9;
    pub const ATT_RADAR_B: usize = 10;
    /// Produces the inertial-feature mask from the radar feature.
    pub const ATT_INERTIAL_W: usize = 11;
    pub const ATT_INERTIAL_B: usize = 12;
    pub const TMP_W_IN: usize = 13;
    pub const TMP_W_HH: usize = 14;
    pub const TMP_B: usize = 15;
    pub const FC_W: [usize; 3] = [16, 18, 20];
    pub const FC_B: [usize; 3] = [17, 19, 21];
    pub const COUNT: usize = 22;
}

pub const PARAM_NAMES: [&str; idx::COUNT] = [
    "conv1.weight",
    "conv1.bias",
    "conv2.weight",
    "conv2.bias",
    "conv3.weight",
    "conv3.bias",
    "imu.w_in",
    "imu.w_hh",
    "imu.bias",
    "attention.radar_gate.weight",
    "attention.radar_gate.bias",
    "attention.inertial_gate.weight",
    "attention.inertial_gate.bias",
    "temporal.w_in",
    "temporal.w_hh",
    "temporal.bias",
    "fc1.weight",
    "fc1.bias",
    "fc2.weight",
    "fc2.bias",
    "fc3.weight",
    "fc3.bias",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    config: ModelConfig,
    tensors: Vec<Tensor>,
}

impl ModelParams {
    /// Shapes (and initialization fan-in) of every tensor, in storage order.
    pub fn layout(config: &ModelConfig) -> Vec<(Vec<usize>, usize)> {
        let fr = config.radar_features();
        let ff = config.fused_features();
        let c = CONV_CHANNELS;
        let mut out = Vec::with_capacity(idx::COUNT);
        for l in 0..3 {
            let fan_in = c[l] * 9;
            out.push((vec![c[l + 1], c[l], 3, 3], fan_in));
            out.push((vec![c[l + 1]], fan_in));
        }
        let imu_fan = IMU_INPUT + IMU_HIDDEN;
        out.push((vec![IMU_HIDDEN, IMU_INPUT], imu_fan));
        out.push((vec![IMU_HIDDEN, IMU_HIDDEN], imu_fan));
        out.push((vec![IMU_HIDDEN], imu_fan));
        out.push((vec![fr, IMU_HIDDEN], IMU_HIDDEN));
        out.push((vec![fr], IMU_HIDDEN));
        out.push((vec![IMU_HIDDEN, fr], fr));
        out.push((vec![IMU_HIDDEN], fr));
        let tmp_fan = ff + TEMPORAL_HIDDEN;
        out.push((vec![TEMPORAL_HIDDEN, ff], tmp_fan));
        out.push((vec![TEMPORAL_HIDDEN, TEMPORAL_HIDDEN], tmp_fan));
        out.push((vec![TEMPORAL_HIDDEN], tmp_fan));
        let mut fan = TEMPORAL_HIDDEN;
        for w in HEAD_WIDTHS {
            out.push((vec![w, fan], fan));
            out.push((vec![w], fan));
            fan = w;
        }
        out
    }

    pub fn zeros(config: ModelConfig) -> Self {
        let tensors = Self::layout(&config).into_iter().map(|(s, _)| Tensor::zeros(s)).collect();
        Self { config, tensors }
    }

    /// Uniform(−s, s) with `s = scale / sqrt(fan_in)` per layer.
    pub fn init(config: ModelConfig, seed: u64, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = Self::layout(&config)
            .into_iter()
            .map(|(shape, fan_in)| {
                let s = scale / (fan_in as f64).sqrt();
                let mut t = Tensor::zeros(shape);
                t.data_mut().iter_mut().for_each(|v| *v = rng.gen_range(-s..=s));
                t
            })
            .collect();
        Self { config, tensors }
    }

    pub fn from_tensors(config: ModelConfig, tensors: Vec<Tensor>) -> Result<Self> {
        let layout = Self::layout(&config);
        if tensors.len() != layout.len() {
            return Err(Error::ShapeMismatch {
                expected: vec![layout.len()],
                got: vec![tensors.len()],
            });
        }
        for (t, (shape, _)) in tensors.iter().zip(&layout) {
            t.expect_shape(shape)?;
        }
        Ok(Self { config, tensors })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, i: usize) -> &[f64] {
        self.tensors[i].data()
    }

    pub fn name(i: usize) -> &'static str {
        PARAM_NAMES[i]
    }

    pub fn count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn zero_grad(&mut self) {
        self.tensors.iter_mut().for_each(Tensor::zero_grad);
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.data().iter().all(|v| v.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_is_toy_scale() {
        let p = ModelParams::init(ModelConfig::default(), 1, 1.0);
        assert_eq!(p.tensors().len(), idx::COUNT);
        assert_eq!(ModelConfig::default().radar_features(), 32 * 2 * 8);
        assert!(p.count() < 1_000_000, "{}", p.count());
        assert!(p.is_finite());
    }

    #[test]
    fn init_respects_fan_in_bound() {
        let p = ModelParams::init(ModelConfig::default(), 9, 1.0);
        for (t, (_, fan)) in p.tensors().iter().zip(ModelParams::layout(p.config())) {
            let s = 1.0 / (fan as f64).sqrt();
            assert!(t.data().iter().all(|v| v.abs() <= s));
        }
        assert_eq!(p, ModelParams::init(ModelConfig::default(), 9, 1.0));
    }

    #[test]
    fn odd_sizes_round_up() {
        let cfg = ModelConfig { height: 17, width: 9 };
        assert_eq!(cfg.encoded_hw(), (3, 2));
    }
}
