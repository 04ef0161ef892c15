//! Slice-level kernels with hand-written backward passes.
//!
//! Weights are row-major `[out, in]` for dense layers and
//! `[c_out, c_in, 3, 3]` for convolutions. Backward functions accumulate
//! (`+=`) into their gradient outputs.

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `y = W x + b`.
pub(crate) fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let cols = x.len();
    debug_assert_eq!(w.len(), b.len() * cols);
    w.chunks_exact(cols)
        .zip(b)
        .map(|(row, bias)| bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

/// `y += W x`.
pub(crate) fn add_matvec(y: &mut [f64], w: &[f64], x: &[f64]) {
    for (yi, row) in y.iter_mut().zip(w.chunks_exact(x.len())) {
        *yi += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Backward of `y = W x + b` given `dy`: accumulates `dW += dy xᵀ`,
/// `db += dy` and, when requested, `dx += Wᵀ dy`.
pub(crate) fn affine_backward(
    w: &[f64],
    x: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: Option<&mut [f64]>,
    dx: Option<&mut [f64]>,
) {
    let cols = x.len();
    for (g, dw_row) in dy.iter().zip(dw.chunks_exact_mut(cols)) {
        if *g != 0.0 {
            for (d, xi) in dw_row.iter_mut().zip(x) {
                *d += g * xi;
            }
        }
    }
    if let Some(db) = db {
        for (d, g) in db.iter_mut().zip(dy) {
            *d += g;
        }
    }
    if let Some(dx) = dx {
        for (g, row) in dy.iter().zip(w.chunks_exact(cols)) {
            if *g != 0.0 {
                for (d, wi) in dx.iter_mut().zip(row) {
                    *d += g * wi;
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ConvShape {
    pub c_in: usize,
    pub c_out: usize,
    pub h: usize,
    pub w: usize,
}

impl ConvShape {
    pub fn out_hw(&self) -> (usize, usize) {
        (self.h.div_ceil(2), self.w.div_ceil(2))
    }
}

/// 3x3 convolution, stride 2, zero padding 1, followed by ReLU.
pub(crate) fn conv_relu(s: ConvShape, input: &[f64], weight: &[f64], bias: &[f64]) -> Vec<f64> {
    let (ho, wo) = s.out_hw();
    let mut out = vec![0.0; s.c_out * ho * wo];
    for o in 0..s.c_out {
        for y in 0..ho {
            for x in 0..wo {
                let mut acc = bias[o];
                for c in 0..s.c_in {
                    let wbase = (o * s.c_in + c) * 9;
                    let ibase = c * s.h * s.w;
                    for ky in 0..3 {
                        let iy = (2 * y + ky).wrapping_sub(1);
                        if iy >= s.h {
                            continue;
                        }
                        for kx in 0..3 {
                            let ix = (2 * x + kx).wrapping_sub(1);
                            if ix >= s.w {
                                continue;
                            }
                            acc += weight[wbase + ky * 3 + kx] * input[ibase + iy * s.w + ix];
                        }
                    }
                }
                out[(o * ho + y) * wo + x] = acc.max(0.0);
            }
        }
    }
    out
}

/// Backward of [`conv_relu`]; `out` is the forward output, used as the ReLU
/// mask.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv_relu_backward(
    s: ConvShape,
    input: &[f64],
    weight: &[f64],
    out: &[f64],
    dout: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    mut dinput: Option<&mut [f64]>,
) {
    let (ho, wo) = s.out_hw();
    for o in 0..s.c_out {
        for y in 0..ho {
            for x in 0..wo {
                let k = (o * ho + y) * wo + x;
                if out[k] <= 0.0 || dout[k] == 0.0 {
                    continue;
                }
                let g = dout[k];
                db[o] += g;
                for c in 0..s.c_in {
                    let wbase = (o * s.c_in + c) * 9;
                    let ibase = c * s.h * s.w;
                    for ky in 0..3 {
                        let iy = (2 * y + ky).wrapping_sub(1);
                        if iy >= s.h {
                            continue;
                        }
                        for kx in 0..3 {
                            let ix = (2 * x + kx).wrapping_sub(1);
                            if ix >= s.w {
                                continue;
                            }
                            let ii = ibase + iy * s.w + ix;
                            dw[wbase + ky * 3 + kx] += g * input[ii];
                            if let Some(di) = dinput.as_deref_mut() {
                                di[ii] += g * weight[wbase + ky * 3 + kx];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// `h' = tanh(W_in x + W_hh h + b)`.
pub(crate) fn tanh_cell(w_in: &[f64], w_hh: &[f64], b: &[f64], x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut pre = affine(w_in, b, x);
    add_matvec(&mut pre, w_hh, h);
    pre.iter_mut().for_each(|v| *v = v.tanh());
    pre
}

/// Gradient through `tanh`: `dpre = dh' ⊙ (1 − h'²)`.
pub(crate) fn tanh_backward(h_new: &[f64], dh_new: &[f64]) -> Vec<f64> {
    h_new.iter().zip(dh_new).map(|(h, g)| g * (1.0 - h * h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_output_size_rounds_up() {
        let s = ConvShape { c_in: 1, c_out: 1, h: 5, w: 8 };
        assert_eq!(s.out_hw(), (3, 4));
    }

    #[test]
    fn conv_centre_tap_copies_input() {
        // weight = 1 on the centre tap picks input[2y][2x]
        let s = ConvShape { c_in: 1, c_out: 1, h: 4, w: 4 };
        let input: Vec<f64> = (0..16).map(|v| v as f64).collect();
        let mut w = vec![0.0; 9];
        w[4] = 1.0;
        let out = conv_relu(s, &input, &w, &[0.0]);
        assert_eq!(out, vec![0.0, 2.0, 8.0, 10.0]);
    }

    #[test]
    fn conv_relu_clips_negative() {
        let s = ConvShape { c_in: 1, c_out: 1, h: 2, w: 2 };
        let out = conv_relu(s, &[1.0; 4], &[-1.0; 9], &[0.5]);
        assert_eq!(out, vec![0.0]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }
}
