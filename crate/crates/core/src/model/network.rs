//! Forward and backward passes of the fusion network.
//!
//! One step maps `(image pair, IMU window, temporal hidden state)` to a
//! relative 6-DoF motion:
//!
//! ```text
//! pair ─ conv×3 ─ a ─┐                      ┌─ a ⊙ σ(W_r b + c_r) ─┐
//!                    ├─ cross-modal gating ─┤                      ├─ tanh cell ─ h' ─ FC×3 ─ 6-DoF
//! imu ── tanh RNN ─ b┘                      └─ b ⊙ σ(W_i a + c_i) ─┘       ↑
//!                                                                    previous h
//! ```

use super::layers::{
    affine, affine_backward, conv_relu, conv_relu_backward, sigmoid, tanh_backward, tanh_cell, ConvShape,
};
use super::params::{idx, ModelConfig, ModelParams, CONV_CHANNELS, IMU_HIDDEN, IMU_INPUT, TEMPORAL_HIDDEN};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::se3::{wrap_angle, SixDof};
use crate::sim::{ImuSample, GRAVITY};

/// Network input vector of one IMU sample. Specific force is expressed in
/// units of g so both halves of the vector are of order one.
pub fn imu_features(s: &ImuSample) -> [f64; IMU_INPUT] {
    let [gx, gy, gz] = s.gyro;
    let [ax, ay, az] = s.accel;
    [gx, gy, gz, ax / GRAVITY, ay / GRAVITY, az / GRAVITY]
}

fn conv_shapes(cfg: &ModelConfig) -> [ConvShape; 3] {
    let mut shapes = [ConvShape { c_in: 0, c_out: 0, h: 0, w: 0 }; 3];
    let (mut h, mut w) = (cfg.height, cfg.width);
    for (l, s) in shapes.iter_mut().enumerate() {
        *s = ConvShape {
            c_in: CONV_CHANNELS[l],
            c_out: CONV_CHANNELS[l + 1],
            h,
            w,
        };
        (h, w) = s.out_hw();
    }
    shapes
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::ShapeMismatch {
            expected: vec![expected],
            got: vec![got],
        });
    }
    Ok(())
}

/// Three stride-2 conv + ReLU layers; returns every layer's output.
fn encode_radar(params: &ModelParams, pair: &[f64]) -> [Vec<f64>; 3] {
    let shapes = conv_shapes(params.config());
    let c1 = conv_relu(shapes[0], pair, params.get(idx::CONV_W[0]), params.get(idx::CONV_B[0]));
    let c2 = conv_relu(shapes[1], &c1, params.get(idx::CONV_W[1]), params.get(idx::CONV_B[1]));
    let c3 = conv_relu(shapes[2], &c2, params.get(idx::CONV_W[2]), params.get(idx::CONV_B[2]));
    [c1, c2, c3]
}

/// Hidden states `h_0 = 0, h_1, …, h_T` of the inertial RNN.
fn encode_imu(params: &ModelParams, inputs: &[[f64; IMU_INPUT]]) -> Vec<Vec<f64>> {
    let mut hs = Vec::with_capacity(inputs.len() + 1);
    hs.push(vec![0.0; IMU_HIDDEN]);
    for x in inputs {
        let h = tanh_cell(
            params.get(idx::IMU_W_IN),
            params.get(idx::IMU_W_HH),
            params.get(idx::IMU_B),
            x,
            hs.last().expect("h_0 present"),
        );
        hs.push(h);
    }
    hs
}

/// `(mask_radar, mask_inertial)`.
fn attention_masks(params: &ModelParams, a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut ma = affine(params.get(idx::ATT_RADAR_W), params.get(idx::ATT_RADAR_B), b);
    let mut mb = affine(params.get(idx::ATT_INERTIAL_W), params.get(idx::ATT_INERTIAL_B), a);
    ma.iter_mut().for_each(|v| *v = sigmoid(*v));
    mb.iter_mut().for_each(|v| *v = sigmoid(*v));
    (ma, mb)
}

fn fuse(a: &[f64], b: &[f64], ma: &[f64], mb: &[f64]) -> Vec<f64> {
    a.iter().zip(ma).chain(b.iter().zip(mb)).map(|(x, m)| x * m).collect()
}

fn temporal(params: &ModelParams, fused: &[f64], hidden: &[f64]) -> Vec<f64> {
    tanh_cell(
        params.get(idx::TMP_W_IN),
        params.get(idx::TMP_W_HH),
        params.get(idx::TMP_B),
        fused,
        hidden,
    )
}

/// Regression head activations `(z1, z2, out)`.
fn head(params: &ModelParams, h: &[f64]) -> (Vec<f64>, Vec<f64>, [f64; 6]) {
    let relu = |mut v: Vec<f64>| {
        v.iter_mut().for_each(|x| *x = x.max(0.0));
        v
    };
    let z1 = relu(affine(params.get(idx::FC_W[0]), params.get(idx::FC_B[0]), h));
    let z2 = relu(affine(params.get(idx::FC_W[1]), params.get(idx::FC_B[1]), &z1));
    let o = affine(params.get(idx::FC_W[2]), params.get(idx::FC_B[2]), &z2);
    (z1, z2, [o[0], o[1], o[2], o[3], o[4], o[5]])
}

fn check_pair(params: &ModelParams, pair: &Tensor) -> Result<()> {
    let cfg = params.config();
    pair.expect_shape(&[2, cfg.height, cfg.width])
}

/// CNN radar feature of a `[2, H, W]` image pair, length `32·⌈H/8⌉·⌈W/8⌉`.
pub fn radar_encoder(pair: &Tensor, params: &ModelParams) -> Result<Tensor> {
    check_pair(params, pair)?;
    let [_, _, c3] = encode_radar(params, pair.data());
    Ok(Tensor::vector(c3))
}

/// Final hidden state of the inertial RNN run over `window` in order.
pub fn imu_encoder(window: &[ImuSample], params: &ModelParams) -> Result<Tensor> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let inputs: Vec<_> = window.iter().map(imu_features).collect();
    let mut hs = encode_imu(params, &inputs);
    Ok(Tensor::vector(hs.pop().expect("non-empty")))
}

/// Cross-modal gating: each modality is scaled by a sigmoid mask computed
/// from the other one, then the two are concatenated.
pub fn mixed_attention_fuse(a: &Tensor, b: &Tensor, params: &ModelParams) -> Result<Tensor> {
    check_len(a.len(), params.config().radar_features())?;
    check_len(b.len(), IMU_HIDDEN)?;
    let (ma, mb) = attention_masks(params, a.data(), b.data());
    Ok(Tensor::vector(fuse(a.data(), b.data(), &ma, &mb)))
}

/// One temporal recurrence; the output is the new hidden state.
pub fn temporal_step(fused: &Tensor, hidden: &Tensor, params: &ModelParams) -> Result<(Tensor, Tensor)> {
    check_len(fused.len(), params.config().fused_features())?;
    check_len(hidden.len(), TEMPORAL_HIDDEN)?;
    let h = temporal(params, fused.data(), hidden.data());
    Ok((Tensor::vector(h.clone()), Tensor::vector(h)))
}

pub fn regress(hidden: &Tensor, params: &ModelParams) -> Result<SixDof> {
    check_len(hidden.len(), TEMPORAL_HIDDEN)?;
    Ok(SixDof::from_array(head(params, hidden.data()).2))
}

/// `‖Δt‖² + λ‖wrap(Δe)‖²`.
pub fn loss(pred: &SixDof, target: &SixDof, lambda: f64) -> f64 {
    loss_and_grad(pred, target, lambda).0
}

pub(crate) fn loss_and_grad(pred: &SixDof, target: &SixDof, lambda: f64) -> (f64, [f64; 6]) {
    let p = pred.to_array();
    let t = target.to_array();
    let mut l = 0.0;
    let mut g = [0.0; 6];
    for k in 0..6 {
        let (r, w) = if k < 3 { (p[k] - t[k], 1.0) } else { (wrap_angle(p[k] - t[k]), lambda) };
        l += w * r * r;
        g[k] = 2.0 * w * r;
    }
    (l, g)
}

/// Everything the backward pass needs from one forward step.
#[derive(Clone, Debug)]
pub(crate) struct StepTrace {
    pair: Vec<f64>,
    conv: [Vec<f64>; 3],
    imu_inputs: Vec<[f64; IMU_INPUT]>,
    imu_hidden: Vec<Vec<f64>>,
    a: Vec<f64>,
    b: Vec<f64>,
    mask_a: Vec<f64>,
    mask_b: Vec<f64>,
    fused: Vec<f64>,
    h_prev: Vec<f64>,
    h_new: Vec<f64>,
    z1: Vec<f64>,
    z2: Vec<f64>,
    pub out: [f64; 6],
}

pub(crate) fn forward_step(params: &ModelParams, pair: &Tensor, window: &[ImuSample], hidden: &[f64]) -> Result<StepTrace> {
    check_pair(params, pair)?;
    check_len(hidden.len(), TEMPORAL_HIDDEN)?;
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let conv = encode_radar(params, pair.data());
    let a = conv[2].clone();
    let imu_inputs: Vec<_> = window.iter().map(imu_features).collect();
    let imu_hidden = encode_imu(params, &imu_inputs);
    let b = imu_hidden.last().expect("non-empty").clone();
    let (mask_a, mask_b) = attention_masks(params, &a, &b);
    let fused = fuse(&a, &b, &mask_a, &mask_b);
    let h_new = temporal(params, &fused, hidden);
    let (z1, z2, out) = head(params, &h_new);
    Ok(StepTrace {
        pair: pair.data().to_vec(),
        conv,
        imu_inputs,
        imu_hidden,
        a,
        b,
        mask_a,
        mask_b,
        fused,
        h_prev: hidden.to_vec(),
        h_new,
        z1,
        z2,
        out,
    })
}

/// Full chain for one frame pair. Returns the motion and the next hidden
/// state; the caller owns the hidden state between calls.
pub fn infer_pair(
    pair: &Tensor,
    imu_window: &[ImuSample],
    hidden: &Tensor,
    params: &ModelParams,
) -> Result<(SixDof, Tensor)> {
    let trace = forward_step(params, pair, imu_window, hidden.data())?;
    Ok((SixDof::from_array(trace.out), Tensor::vector(trace.h_new)))
}

pub fn initial_hidden() -> Tensor {
    Tensor::zeros(vec![TEMPORAL_HIDDEN])
}

/// Gradients with respect to the network inputs of a recorded window.
#[derive(Clone, Debug, Default)]
pub struct InputGrads {
    /// One `[2, H, W]` gradient per step.
    pub pairs: Vec<Vec<f64>>,
    /// Gradient w.r.t. raw `(gyro, accel)` sample values, per step and sample.
    pub imu: Vec<Vec<[f64; 6]>>,
    /// Gradient w.r.t. the hidden state entering the first step.
    pub initial_hidden: Vec<f64>,
}

/// Forward record of a run of consecutive steps (one truncated-BPTT window)
/// together with the loss attached to each step.
#[derive(Clone, Debug, Default)]
pub struct Recording {
    steps: Vec<StepTrace>,
    loss_grads: Vec<Option<[f64; 6]>>,
}

impl Recording {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Runs and records one step, returning the prediction and new hidden state.
    pub fn step(
        &mut self,
        params: &ModelParams,
        pair: &Tensor,
        window: &[ImuSample],
        hidden: &Tensor,
    ) -> Result<(SixDof, Tensor)> {
        let trace = forward_step(params, pair, window, hidden.data())?;
        let out = (SixDof::from_array(trace.out), Tensor::vector(trace.h_new.clone()));
        self.steps.push(trace);
        self.loss_grads.push(None);
        Ok(out)
    }

    /// Attaches `weight · loss(pred, target, λ)` to the most recent step and
    /// returns the unweighted loss.
    pub fn attach_loss(&mut self, target: &SixDof, lambda: f64, weight: f64) -> Result<f64> {
        let trace = self.steps.last().ok_or(Error::GraphNotRecorded)?;
        let (l, mut g) = loss_and_grad(&SixDof::from_array(trace.out), target, lambda);
        g.iter_mut().for_each(|v| *v *= weight);
        let slot = self.loss_grads.last_mut().expect("parallel to steps");
        match slot {
            Some(acc) => acc.iter_mut().zip(g).for_each(|(a, b)| *a += b),
            None => *slot = Some(g),
        }
        Ok(l)
    }

    /// On/off state of every convolution ReLU across the recorded steps. Two
    /// recordings with equal patterns lie on the same linear piece of the
    /// network, which is what finite-difference checks need.
    pub fn relu_pattern(&self) -> Vec<bool> {
        self.steps
            .iter()
            .flat_map(|s| s.conv.iter().flatten().map(|v| *v > 0.0))
            .collect()
    }

    /// Reverse-mode pass over the recorded window. Parameter gradient buffers
    /// are zeroed and then filled with `∂L/∂θ`.
    pub fn backward(&self, params: &mut ModelParams) -> Result<InputGrads> {
        if self.steps.is_empty() || self.loss_grads.iter().all(Option::is_none) {
            return Err(Error::GraphNotRecorded);
        }
        let mut grads: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        let mut inputs = InputGrads::default();
        let mut dh_next = vec![0.0; TEMPORAL_HIDDEN];
        for (trace, lg) in self.steps.iter().zip(&self.loss_grads).rev() {
            let d_out = lg.unwrap_or([0.0; 6]);
            let (dh_prev, d_pair, d_imu) = backward_step(params, trace, &d_out, &dh_next, &mut grads);
            dh_next = dh_prev;
            inputs.pairs.push(d_pair);
            inputs.imu.push(d_imu);
        }
        inputs.pairs.reverse();
        inputs.imu.reverse();
        inputs.initial_hidden = dh_next;
        for (t, g) in params.tensors_mut().iter_mut().zip(grads) {
            t.grad_mut().copy_from_slice(&g);
        }
        Ok(inputs)
    }
}

/// Backward through one step. Returns `(∂L/∂h_prev, ∂L/∂pair, ∂L/∂imu)`.
fn backward_step(
    params: &ModelParams,
    tr: &StepTrace,
    d_out: &[f64; 6],
    dh_next: &[f64],
    grads: &mut [Vec<f64>],
) -> (Vec<f64>, Vec<f64>, Vec<[f64; 6]>) {
    let cfg = *params.config();
    let fr = cfg.radar_features();

    // regression head
    let mut dz2 = vec![0.0; tr.z2.len()];
    {
        let (dw, db) = two_mut(grads, idx::FC_W[2], idx::FC_B[2]);
        affine_backward(params.get(idx::FC_W[2]), &tr.z2, d_out, dw, Some(db), Some(&mut dz2));
    }
    relu_mask(&mut dz2, &tr.z2);
    let mut dz1 = vec![0.0; tr.z1.len()];
    {
        let (dw, db) = two_mut(grads, idx::FC_W[1], idx::FC_B[1]);
        affine_backward(params.get(idx::FC_W[1]), &tr.z1, &dz2, dw, Some(db), Some(&mut dz1));
    }
    relu_mask(&mut dz1, &tr.z1);
    let mut dh = dh_next.to_vec();
    {
        let (dw, db) = two_mut(grads, idx::FC_W[0], idx::FC_B[0]);
        affine_backward(params.get(idx::FC_W[0]), &tr.h_new, &dz1, dw, Some(db), Some(&mut dh));
    }

    // temporal cell
    let dpre = tanh_backward(&tr.h_new, &dh);
    let mut dfused = vec![0.0; tr.fused.len()];
    let mut dh_prev = vec![0.0; TEMPORAL_HIDDEN];
    {
        let (dw, db) = two_mut(grads, idx::TMP_W_IN, idx::TMP_B);
        affine_backward(params.get(idx::TMP_W_IN), &tr.fused, &dpre, dw, Some(db), Some(&mut dfused));
    }
    affine_backward(
        params.get(idx::TMP_W_HH),
        &tr.h_prev,
        &dpre,
        &mut grads[idx::TMP_W_HH],
        None,
        Some(&mut dh_prev),
    );

    // mixed attention
    let (g_a, g_b) = dfused.split_at(fr);
    let mut da: Vec<f64> = g_a.iter().zip(&tr.mask_a).map(|(g, m)| g * m).collect();
    let mut db: Vec<f64> = g_b.iter().zip(&tr.mask_b).map(|(g, m)| g * m).collect();
    let dz_a: Vec<f64> = g_a
        .iter()
        .zip(&tr.a)
        .zip(&tr.mask_a)
        .map(|((g, a), m)| g * a * m * (1.0 - m))
        .collect();
    let dz_b: Vec<f64> = g_b
        .iter()
        .zip(&tr.b)
        .zip(&tr.mask_b)
        .map(|((g, b), m)| g * b * m * (1.0 - m))
        .collect();
    {
        let (dw, dc) = two_mut(grads, idx::ATT_RADAR_W, idx::ATT_RADAR_B);
        affine_backward(params.get(idx::ATT_RADAR_W), &tr.b, &dz_a, dw, Some(dc), Some(&mut db));
    }
    {
        let (dw, dc) = two_mut(grads, idx::ATT_INERTIAL_W, idx::ATT_INERTIAL_B);
        affine_backward(params.get(idx::ATT_INERTIAL_W), &tr.a, &dz_b, dw, Some(dc), Some(&mut da));
    }

    // inertial RNN, back through time
    let mut d_imu = vec![[0.0; 6]; tr.imu_inputs.len()];
    let mut dh_imu = db;
    for t in (1..tr.imu_hidden.len()).rev() {
        let dpre = tanh_backward(&tr.imu_hidden[t], &dh_imu);
        let mut dx = [0.0; IMU_INPUT];
        {
            let (dw, dbias) = two_mut(grads, idx::IMU_W_IN, idx::IMU_B);
            affine_backward(params.get(idx::IMU_W_IN), &tr.imu_inputs[t - 1], &dpre, dw, Some(dbias), Some(&mut dx));
        }
        let mut dh_prev_imu = vec![0.0; IMU_HIDDEN];
        affine_backward(
            params.get(idx::IMU_W_HH),
            &tr.imu_hidden[t - 1],
            &dpre,
            &mut grads[idx::IMU_W_HH],
            None,
            Some(&mut dh_prev_imu),
        );
        dh_imu = dh_prev_imu;
        // undo the 1/g feature scaling on the accelerometer half
        d_imu[t - 1] = [dx[0], dx[1], dx[2], dx[3] / GRAVITY, dx[4] / GRAVITY, dx[5] / GRAVITY];
    }

    // radar CNN
    let shapes = conv_shapes(&cfg);
    let mut dcur = da;
    for l in (0..3).rev() {
        let input: &[f64] = if l == 0 { &tr.pair } else { &tr.conv[l - 1] };
        let s = shapes[l];
        let mut dinput = vec![0.0; s.c_in * s.h * s.w];
        let (dw, dbias) = two_mut(grads, idx::CONV_W[l], idx::CONV_B[l]);
        conv_relu_backward(
            s,
            input,
            params.get(idx::CONV_W[l]),
            &tr.conv[l],
            &dcur,
            dw,
            dbias,
            Some(&mut dinput),
        );
        dcur = dinput;
    }

    (dh_prev, dcur, d_imu)
}

fn relu_mask(d: &mut [f64], activation: &[f64]) {
    for (g, z) in d.iter_mut().zip(activation) {
        if *z <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Disjoint mutable borrows of two gradient buffers, `i < j`.
fn two_mut(grads: &mut [Vec<f64>], i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(i < j);
    let (lo, hi) = grads.split_at_mut(j);
    (&mut lo[i], &mut hi[0])
}
