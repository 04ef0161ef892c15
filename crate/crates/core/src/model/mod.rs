//! Toy-scale radar/inertial fusion network with hand-written backprop.

pub mod checkpoint;
mod layers;
mod network;
mod params;
mod tensor;
mod train;

pub use network::{
    imu_encoder, imu_features, infer_pair, initial_hidden, loss, mixed_attention_fuse, radar_encoder, regress,
    temporal_step, InputGrads, Recording,
};
pub use params::{idx, ModelConfig, ModelParams, CONV_CHANNELS, IMU_HIDDEN, PARAM_NAMES, TEMPORAL_HIDDEN};
pub use tensor::Tensor;
pub use train::{loss_curve_csv, train, train_params, Sample, TrainingConfig, TrainingOutcome};
