//! 1-D convolution along the feature axis with same padding.
//!
//! Weights are laid out `(out_channels, in_channels, kernel)`, signals
//! `(channels, positions)` row-major. The kernel length must be odd so the
//! output aligns with the input.

use super::Scalar;

/// out[o, p] += sum_i sum_t w[o, i, t] * input[i, p + t - pad]
pub fn conv1d_forward<F: Scalar>(
    weights: &[F],
    input: &[F],
    out: &mut [F],
    in_ch: usize,
    out_ch: usize,
    len: usize,
    kernel: usize,
) {
    debug_assert_eq!(weights.len(), out_ch * in_ch * kernel);
    debug_assert_eq!(input.len(), in_ch * len);
    debug_assert_eq!(out.len(), out_ch * len);
    let pad = kernel / 2;
    for o in 0..out_ch {
        for i in 0..in_ch {
            let w = &weights[(o * in_ch + i) * kernel..(o * in_ch + i + 1) * kernel];
            let x = &input[i * len..(i + 1) * len];
            let y = &mut out[o * len..(o + 1) * len];
            for (t, &wt) in w.iter().enumerate() {
                // p + t - pad in [0, len)
                let lo = pad.saturating_sub(t);
                let hi = (len + pad).saturating_sub(t).min(len);
                for p in lo..hi {
                    y[p] += wt * x[p + t - pad];
                }
            }
        }
    }
}

/// Gradient with respect to the input signal (transposed convolution).
pub fn conv1d_input_grad<F: Scalar>(
    weights: &[F],
    dout: &[F],
    dinput: &mut [F],
    in_ch: usize,
    out_ch: usize,
    len: usize,
    kernel: usize,
) {
    let pad = kernel / 2;
    for o in 0..out_ch {
        for i in 0..in_ch {
            let w = &weights[(o * in_ch + i) * kernel..(o * in_ch + i + 1) * kernel];
            let dy = &dout[o * len..(o + 1) * len];
            let dx = &mut dinput[i * len..(i + 1) * len];
            for (t, &wt) in w.iter().enumerate() {
                let lo = pad.saturating_sub(t);
                let hi = (len + pad).saturating_sub(t).min(len);
                for p in lo..hi {
                    dx[p + t - pad] += wt * dy[p];
                }
            }
        }
    }
}

/// Gradient with respect to the weights, accumulated in place.
pub fn conv1d_weight_grad<F: Scalar>(
    input: &[F],
    dout: &[F],
    dweights: &mut [F],
    in_ch: usize,
    out_ch: usize,
    len: usize,
    kernel: usize,
) {
    let pad = kernel / 2;
    for o in 0..out_ch {
        for i in 0..in_ch {
            let dw = &mut dweights[(o * in_ch + i) * kernel..(o * in_ch + i + 1) * kernel];
            let x = &input[i * len..(i + 1) * len];
            let dy = &dout[o * len..(o + 1) * len];
            for (t, dwt) in dw.iter_mut().enumerate() {
                let lo = pad.saturating_sub(t);
                let hi = (len + pad).saturating_sub(t).min(len);
                let mut acc = F::ZERO;
                for p in lo..hi {
                    acc += x[p + t - pad] * dy[p];
                }
                *dwt += acc;
            }
        }
    }
}
