//! mmWave radar + inertial deep-fusion odometry at desk scale.
//!
//! The crate covers the whole loop: a 2.5D apartment simulator producing
//! sparse radar point clouds and biased IMU streams ([`sim`]), the panoramic
//! imaging front-end ([`imaging`]), a small fusion network trained from
//! scratch ([`model`]), a threaded streaming runtime with a binary pose
//! uplink ([`pipeline`]) and trajectory evaluation ([`eval`]).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fmt;
pub mod imaging;
pub mod model;
pub mod pipeline;
pub mod se3;
pub mod sim;

pub use error::{Error, Result};
pub use se3::{PoseSE3, SixDof, Trajectory};
