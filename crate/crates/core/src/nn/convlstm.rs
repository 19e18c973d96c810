//! Convolutional LSTM cell over 1-D feature maps.
//!
//! Gate pre-activations convolve both the input frame and the previous
//! hidden map; the input, forget and output gates additionally carry
//! elementwise peephole terms on the cell state. The output gate peeks at
//! the current cell state, and the candidate line uses the same convolution
//! as the gates.

use super::conv::{conv1d_forward, conv1d_input_grad, conv1d_weight_grad};
use super::{sigmoid, ParamVisitor, Scalar, Tensor};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const GATES: [&str; 4] = ["i", "f", "c", "o"];

/// The cell's parameters. Hidden state and cell state have shape
/// `(hidden_ch, len)`; input frames `(in_ch, len)`.
#[derive(Debug, Clone)]
pub struct ConvLstmCell<F> {
    pub in_ch: usize,
    pub hidden_ch: usize,
    pub len: usize,
    pub kernel: usize,
    /// Input convolutions, one per gate (i, f, c, o).
    w_x: [Tensor<F>; 4],
    /// Hidden-state convolutions, one per gate.
    w_h: [Tensor<F>; 4],
    /// Peephole weights for the i, f and o gates, cell-state shaped.
    w_peep: [Tensor<F>; 3],
    /// Per-channel biases, one per gate.
    bias: [Tensor<F>; 4],
    // Gradient buffers, aligned with the fields above.
    gw_x: [Tensor<F>; 4],
    gw_h: [Tensor<F>; 4],
    gw_peep: [Tensor<F>; 3],
    gbias: [Tensor<F>; 4],
}

/// Forward intermediates needed by the backward pass.
pub struct ConvLstmCache<F> {
    pub xs: Vec<Vec<F>>,
    /// Gate activations per timestep.
    i: Vec<Vec<F>>,
    f: Vec<Vec<F>>,
    g: Vec<Vec<F>>,
    o: Vec<Vec<F>>,
    /// Cell states per timestep, plus the initial state at index 0.
    c: Vec<Vec<F>>,
    pub h: Vec<Vec<F>>,
}

impl<F: Scalar> ConvLstmCell<F> {
    pub fn new(in_ch: usize, hidden_ch: usize, len: usize, kernel: usize, rng: &mut ChaCha8Rng) -> Self {
        assert!(kernel % 2 == 1, "same padding needs an odd kernel");
        let wx_shape = [hidden_ch, in_ch, kernel];
        let wh_shape = [hidden_ch, hidden_ch, kernel];
        let state_shape = [hidden_ch, len];
        let limit_x = (6.0 / ((in_ch * kernel + hidden_ch * kernel) as f64)).sqrt();
        let limit_h = (6.0 / ((hidden_ch * kernel * 2) as f64)).sqrt();
        let mut init = |shape: &[usize], limit: f64| {
            let mut t = Tensor::zeros(shape);
            for v in t.data_mut() {
                *v = F::from_f64(rng.gen_range(-limit..limit));
            }
            t
        };
        let w_x = [
            init(&wx_shape, limit_x),
            init(&wx_shape, limit_x),
            init(&wx_shape, limit_x),
            init(&wx_shape, limit_x),
        ];
        let w_h = [
            init(&wh_shape, limit_h),
            init(&wh_shape, limit_h),
            init(&wh_shape, limit_h),
            init(&wh_shape, limit_h),
        ];
        // Peepholes start at zero; the forget-gate bias starts at one so
        // the cell state survives early training.
        let w_peep = [
            Tensor::zeros(&state_shape),
            Tensor::zeros(&state_shape),
            Tensor::zeros(&state_shape),
        ];
        let mut forget_bias = Tensor::zeros(&[hidden_ch]);
        forget_bias.fill(F::ONE);
        let bias = [
            Tensor::zeros(&[hidden_ch]),
            forget_bias,
            Tensor::zeros(&[hidden_ch]),
            Tensor::zeros(&[hidden_ch]),
        ];
        Self {
            in_ch,
            hidden_ch,
            len,
            kernel,
            gw_x: w_x.clone().map(|t| Tensor::zeros(t.shape())),
            gw_h: w_h.clone().map(|t| Tensor::zeros(t.shape())),
            gw_peep: w_peep.clone().map(|t| Tensor::zeros(t.shape())),
            gbias: bias.clone().map(|t| Tensor::zeros(t.shape())),
            w_x,
            w_h,
            w_peep,
            bias,
        }
    }

    pub fn state_len(&self) -> usize {
        self.hidden_ch * self.len
    }

    /// Runs the cell over a sequence of frames starting from zero states.
    pub fn forward_seq(&self, xs: &[Vec<F>]) -> ConvLstmCache<F> {
        let steps = xs.len();
        let sl = self.state_len();
        let mut cache = ConvLstmCache {
            xs: xs.to_vec(),
            i: Vec::with_capacity(steps),
            f: Vec::with_capacity(steps),
            g: Vec::with_capacity(steps),
            o: Vec::with_capacity(steps),
            c: vec![vec![F::ZERO; sl]],
            h: Vec::with_capacity(steps),
        };
        let mut h_prev = vec![F::ZERO; sl];
        for x in xs {
            debug_assert_eq!(x.len(), self.in_ch * self.len, "frame width mismatch");
            let c_prev = cache.c.last().unwrap().clone();
            let mut pre = [
                vec![F::ZERO; sl],
                vec![F::ZERO; sl],
                vec![F::ZERO; sl],
                vec![F::ZERO; sl],
            ];
            for gate in 0..4 {
                conv1d_forward(
                    self.w_x[gate].data(),
                    x,
                    &mut pre[gate],
                    self.in_ch,
                    self.hidden_ch,
                    self.len,
                    self.kernel,
                );
                conv1d_forward(
                    self.w_h[gate].data(),
                    &h_prev,
                    &mut pre[gate],
                    self.hidden_ch,
                    self.hidden_ch,
                    self.len,
                    self.kernel,
                );
                let b = self.bias[gate].data();
                for ch in 0..self.hidden_ch {
                    for p in 0..self.len {
                        pre[gate][ch * self.len + p] += b[ch];
                    }
                }
            }
            let [pre_i, pre_f, pre_g, pre_o] = pre;
            let peep_i = self.w_peep[0].data();
            let peep_f = self.w_peep[1].data();
            let peep_o = self.w_peep[2].data();

            let mut i_t = vec![F::ZERO; sl];
            let mut f_t = vec![F::ZERO; sl];
            let mut g_t = vec![F::ZERO; sl];
            let mut c_t = vec![F::ZERO; sl];
            for j in 0..sl {
                i_t[j] = sigmoid(pre_i[j] + peep_i[j] * c_prev[j]);
                f_t[j] = sigmoid(pre_f[j] + peep_f[j] * c_prev[j]);
                g_t[j] = pre_g[j].tanh();
                c_t[j] = f_t[j] * c_prev[j] + i_t[j] * g_t[j];
            }
            let mut o_t = vec![F::ZERO; sl];
            let mut h_t = vec![F::ZERO; sl];
            for j in 0..sl {
                o_t[j] = sigmoid(pre_o[j] + peep_o[j] * c_t[j]);
                h_t[j] = o_t[j] * c_t[j].tanh();
            }
            cache.i.push(i_t);
            cache.f.push(f_t);
            cache.g.push(g_t);
            cache.o.push(o_t);
            cache.c.push(c_t);
            cache.h.push(h_t.clone());
            h_prev = h_t;
        }
        cache
    }

    /// Backpropagates through the whole sequence. `dh_seq` carries the loss
    /// gradient on every hidden output; parameter gradients accumulate into
    /// the cell's buffers and the input-frame gradients are returned.
    pub fn backward_seq(&mut self, cache: &ConvLstmCache<F>, dh_seq: &[Vec<F>]) -> Vec<Vec<F>> {
        let steps = cache.h.len();
        assert_eq!(dh_seq.len(), steps);
        let sl = self.state_len();
        let mut dxs = vec![vec![F::ZERO; self.in_ch * self.len]; steps];
        let mut dh_next = vec![F::ZERO; sl];
        let mut dc_next = vec![F::ZERO; sl];

        for t in (0..steps).rev() {
            let c_prev = &cache.c[t];
            let c_t = &cache.c[t + 1];
            let i_t = &cache.i[t];
            let f_t = &cache.f[t];
            let g_t = &cache.g[t];
            let o_t = &cache.o[t];
            let h_prev_exists = t > 0;

            let mut dh = dh_seq[t].clone();
            for j in 0..sl {
                dh[j] += dh_next[j];
            }

            let peep_i = self.w_peep[0].data();
            let peep_f = self.w_peep[1].data();
            let peep_o = self.w_peep[2].data();

            let mut d_pre_i = vec![F::ZERO; sl];
            let mut d_pre_f = vec![F::ZERO; sl];
            let mut d_pre_g = vec![F::ZERO; sl];
            let mut d_pre_o = vec![F::ZERO; sl];
            let mut dc_prev = vec![F::ZERO; sl];
            let mut d_peep = [vec![F::ZERO; sl], vec![F::ZERO; sl], vec![F::ZERO; sl]];
            for j in 0..sl {
                let tanh_c = c_t[j].tanh();
                let d_o = dh[j] * tanh_c;
                let d_o_pre = d_o * o_t[j] * (F::ONE - o_t[j]);
                // dC collects the hidden path, the carried-in gradient and
                // the output gate's peephole on the current cell state.
                let d_c = dh[j] * o_t[j] * (F::ONE - tanh_c * tanh_c)
                    + dc_next[j]
                    + peep_o[j] * d_o_pre;

                let d_f_pre = d_c * c_prev[j] * f_t[j] * (F::ONE - f_t[j]);
                let d_i_pre = d_c * g_t[j] * i_t[j] * (F::ONE - i_t[j]);
                let d_g_pre = d_c * i_t[j] * (F::ONE - g_t[j] * g_t[j]);

                dc_prev[j] = d_c * f_t[j] + peep_i[j] * d_i_pre + peep_f[j] * d_f_pre;

                d_peep[0][j] = d_i_pre * c_prev[j];
                d_peep[1][j] = d_f_pre * c_prev[j];
                d_peep[2][j] = d_o_pre * c_t[j];

                d_pre_i[j] = d_i_pre;
                d_pre_f[j] = d_f_pre;
                d_pre_g[j] = d_g_pre;
                d_pre_o[j] = d_o_pre;
            }
            for (idx, dp) in d_peep.iter().enumerate() {
                let g = self.gw_peep[idx].data_mut();
                for j in 0..sl {
                    g[j] += dp[j];
                }
            }
            let d_pre = [d_pre_i, d_pre_f, d_pre_g, d_pre_o];

            let x = &cache.xs[t];
            let h_prev_owned;
            let h_prev: &[F] = if h_prev_exists {
                &cache.h[t - 1]
            } else {
                h_prev_owned = vec![F::ZERO; sl];
                &h_prev_owned
            };
            let mut dh_prev = vec![F::ZERO; sl];
            for gate in 0..4 {
                let d = &d_pre[gate];
                for ch in 0..self.hidden_ch {
                    let mut acc = F::ZERO;
                    for p in 0..self.len {
                        acc += d[ch * self.len + p];
                    }
                    self.gbias[gate].data_mut()[ch] += acc;
                }
                conv1d_weight_grad(
                    x,
                    d,
                    self.gw_x[gate].data_mut(),
                    self.in_ch,
                    self.hidden_ch,
                    self.len,
                    self.kernel,
                );
                conv1d_input_grad(
                    self.w_x[gate].data(),
                    d,
                    &mut dxs[t],
                    self.in_ch,
                    self.hidden_ch,
                    self.len,
                    self.kernel,
                );
                conv1d_weight_grad(
                    h_prev,
                    d,
                    self.gw_h[gate].data_mut(),
                    self.hidden_ch,
                    self.hidden_ch,
                    self.len,
                    self.kernel,
                );
                conv1d_input_grad(
                    self.w_h[gate].data(),
                    d,
                    &mut dh_prev,
                    self.hidden_ch,
                    self.hidden_ch,
                    self.len,
                    self.kernel,
                );
            }
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
        dxs
    }

    pub fn zero_grads(&mut self) {
        for g in self.gw_x.iter_mut().chain(self.gw_h.iter_mut()) {
            g.fill(F::ZERO);
        }
        for g in self.gw_peep.iter_mut() {
            g.fill(F::ZERO);
        }
        for g in self.gbias.iter_mut() {
            g.fill(F::ZERO);
        }
    }

    pub fn visit_params(&mut self, visitor: &mut impl ParamVisitor<F>) {
        for gate in 0..4 {
            visitor.visit(&format!("wx_{}", GATES[gate]), &mut self.w_x[gate], &mut self.gw_x[gate]);
        }
        for gate in 0..4 {
            visitor.visit(&format!("wh_{}", GATES[gate]), &mut self.w_h[gate], &mut self.gw_h[gate]);
        }
        for (idx, name) in ["peep_i", "peep_f", "peep_o"].iter().enumerate() {
            visitor.visit(name, &mut self.w_peep[idx], &mut self.gw_peep[idx]);
        }
        for gate in 0..4 {
            visitor.visit(&format!("b_{}", GATES[gate]), &mut self.bias[gate], &mut self.gbias[gate]);
        }
    }
}
