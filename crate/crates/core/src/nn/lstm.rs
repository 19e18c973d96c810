//! Standard LSTM layer (no peepholes); matrix products in place of the
//! convolutional gate maps.

use super::{sigmoid, ParamVisitor, Scalar, Tensor};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Gate order in the stacked weight matrices: i, f, g (candidate), o.
#[derive(Debug, Clone)]
pub struct LstmLayer<F> {
    pub in_dim: usize,
    pub hidden: usize,
    /// (4 * hidden, in_dim)
    w_x: Tensor<F>,
    /// (4 * hidden, hidden)
    w_h: Tensor<F>,
    /// (4 * hidden)
    bias: Tensor<F>,
    gw_x: Tensor<F>,
    gw_h: Tensor<F>,
    gbias: Tensor<F>,
}

pub struct LstmCache<F> {
    xs: Vec<Vec<F>>,
    i: Vec<Vec<F>>,
    f: Vec<Vec<F>>,
    g: Vec<Vec<F>>,
    o: Vec<Vec<F>>,
    c: Vec<Vec<F>>,
    pub h: Vec<Vec<F>>,
}

impl<F: Scalar> LstmLayer<F> {
    pub fn new(in_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit_x = (6.0 / (in_dim + hidden) as f64).sqrt();
        let limit_h = (6.0 / (2 * hidden) as f64).sqrt();
        let mut w_x = Tensor::zeros(&[4 * hidden, in_dim]);
        for v in w_x.data_mut() {
            *v = F::from_f64(rng.gen_range(-limit_x..limit_x));
        }
        let mut w_h = Tensor::zeros(&[4 * hidden, hidden]);
        for v in w_h.data_mut() {
            *v = F::from_f64(rng.gen_range(-limit_h..limit_h));
        }
        // Unit forget-gate bias so memory survives deep stacks.
        let mut bias = Tensor::zeros(&[4 * hidden]);
        for j in hidden..2 * hidden {
            bias.data_mut()[j] = F::ONE;
        }
        Self {
            in_dim,
            hidden,
            gw_x: Tensor::zeros(w_x.shape()),
            gw_h: Tensor::zeros(w_h.shape()),
            gbias: Tensor::zeros(bias.shape()),
            w_x,
            w_h,
            bias,
        }
    }

    pub fn forward_seq(&self, xs: &[Vec<F>]) -> LstmCache<F> {
        let h = self.hidden;
        let mut cache = LstmCache {
            xs: xs.to_vec(),
            i: Vec::new(),
            f: Vec::new(),
            g: Vec::new(),
            o: Vec::new(),
            c: vec![vec![F::ZERO; h]],
            h: Vec::new(),
        };
        let mut h_prev = vec![F::ZERO; h];
        for x in xs {
            debug_assert_eq!(x.len(), self.in_dim);
            let c_prev = cache.c.last().unwrap().clone();
            let mut pre = self.bias.data().to_vec();
            let wx = self.w_x.data();
            for (row, p) in pre.iter_mut().enumerate() {
                let w = &wx[row * self.in_dim..(row + 1) * self.in_dim];
                let mut acc = F::ZERO;
                for (wv, xv) in w.iter().zip(x) {
                    acc += *wv * *xv;
                }
                *p += acc;
            }
            let wh = self.w_h.data();
            for (row, p) in pre.iter_mut().enumerate() {
                let w = &wh[row * h..(row + 1) * h];
                let mut acc = F::ZERO;
                for (wv, hv) in w.iter().zip(&h_prev) {
                    acc += *wv * *hv;
                }
                *p += acc;
            }
            let mut i_t = vec![F::ZERO; h];
            let mut f_t = vec![F::ZERO; h];
            let mut g_t = vec![F::ZERO; h];
            let mut o_t = vec![F::ZERO; h];
            let mut c_t = vec![F::ZERO; h];
            let mut h_t = vec![F::ZERO; h];
            for j in 0..h {
                i_t[j] = sigmoid(pre[j]);
                f_t[j] = sigmoid(pre[h + j]);
                g_t[j] = pre[2 * h + j].tanh();
                o_t[j] = sigmoid(pre[3 * h + j]);
                c_t[j] = f_t[j] * c_prev[j] + i_t[j] * g_t[j];
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

    pub fn backward_seq(&mut self, cache: &LstmCache<F>, dh_seq: &[Vec<F>]) -> Vec<Vec<F>> {
        let h = self.hidden;
        let steps = cache.h.len();
        let mut dxs = vec![vec![F::ZERO; self.in_dim]; steps];
        let mut dh_next = vec![F::ZERO; h];
        let mut dc_next = vec![F::ZERO; h];
        for t in (0..steps).rev() {
            let c_prev = &cache.c[t];
            let c_t = &cache.c[t + 1];
            let (i_t, f_t, g_t, o_t) = (&cache.i[t], &cache.f[t], &cache.g[t], &cache.o[t]);
            let mut d_pre = vec![F::ZERO; 4 * h];
            let mut dc_prev = vec![F::ZERO; h];
            for j in 0..h {
                let dh = dh_seq[t][j] + dh_next[j];
                let tanh_c = c_t[j].tanh();
                let d_o_pre = dh * tanh_c * o_t[j] * (F::ONE - o_t[j]);
                let d_c = dh * o_t[j] * (F::ONE - tanh_c * tanh_c) + dc_next[j];
                let d_f_pre = d_c * c_prev[j] * f_t[j] * (F::ONE - f_t[j]);
                let d_i_pre = d_c * g_t[j] * i_t[j] * (F::ONE - i_t[j]);
                let d_g_pre = d_c * i_t[j] * (F::ONE - g_t[j] * g_t[j]);
                dc_prev[j] = d_c * f_t[j];
                d_pre[j] = d_i_pre;
                d_pre[h + j] = d_f_pre;
                d_pre[2 * h + j] = d_g_pre;
                d_pre[3 * h + j] = d_o_pre;
            }
            let x = &cache.xs[t];
            let zero_h;
            let h_prev: &[F] = if t > 0 {
                &cache.h[t - 1]
            } else {
                zero_h = vec![F::ZERO; h];
                &zero_h
            };
            {
                let gb = self.gbias.data_mut();
                for row in 0..4 * h {
                    gb[row] += d_pre[row];
                }
            }
            {
                let gwx = self.gw_x.data_mut();
                let wx = self.w_x.data();
                for row in 0..4 * h {
                    let d = d_pre[row];
                    if d == F::ZERO {
                        continue;
                    }
                    let grow = &mut gwx[row * self.in_dim..(row + 1) * self.in_dim];
                    for (gj, xv) in grow.iter_mut().zip(x) {
                        *gj += d * *xv;
                    }
                    let wrow = &wx[row * self.in_dim..(row + 1) * self.in_dim];
                    for (dxj, wv) in dxs[t].iter_mut().zip(wrow) {
                        *dxj += d * *wv;
                    }
                }
            }
            let mut dh_prev = vec![F::ZERO; h];
            {
                let gwh = self.gw_h.data_mut();
                let wh = self.w_h.data();
                for row in 0..4 * h {
                    let d = d_pre[row];
                    if d == F::ZERO {
                        continue;
                    }
                    let grow = &mut gwh[row * h..(row + 1) * h];
                    for (gj, hv) in grow.iter_mut().zip(h_prev) {
                        *gj += d * *hv;
                    }
                    let wrow = &wh[row * h..(row + 1) * h];
                    for (dj, wv) in dh_prev.iter_mut().zip(wrow) {
                        *dj += d * *wv;
                    }
                }
            }
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
        dxs
    }

    pub fn zero_grads(&mut self) {
        self.gw_x.fill(F::ZERO);
        self.gw_h.fill(F::ZERO);
        self.gbias.fill(F::ZERO);
    }

    pub fn visit_params(&mut self, visitor: &mut impl ParamVisitor<F>) {
        visitor.visit("w_x", &mut self.w_x, &mut self.gw_x);
        visitor.visit("w_h", &mut self.w_h, &mut self.gw_h);
        visitor.visit("bias", &mut self.bias, &mut self.gbias);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn zero_weights_give_zero_outputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut layer: LstmLayer<f64> = LstmLayer::new(3, 2, &mut rng);
        let mut zero = |_: &str, p: &mut Tensor<f64>, _: &mut Tensor<f64>| p.fill(0.0);
        layer.visit_params(&mut zero);
        let cache = layer.forward_seq(&[vec![1.0, -1.0, 0.5], vec![2.0, 0.0, 1.0]]);
        for h in &cache.h {
            assert!(h.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn scalar_cell_matches_hand_evaluation() {
        // 1-d input, 1 hidden unit, single timestep, all weights set by hand.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut layer: LstmLayer<f64> = LstmLayer::new(1, 1, &mut rng);
        let mut set = |name: &str, p: &mut Tensor<f64>, _: &mut Tensor<f64>| match name {
            "w_x" => p.data_mut().copy_from_slice(&[0.3, -0.2, 0.5, 0.7]),
            "w_h" => p.data_mut().copy_from_slice(&[0.0, 0.0, 0.0, 0.0]),
            "bias" => p.data_mut().copy_from_slice(&[0.1, 0.2, -0.1, 0.0]),
            _ => {}
        };
        layer.visit_params(&mut set);
        let x = 0.8;
        let cache = layer.forward_seq(&[vec![x]]);
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let i = sig(0.3 * x + 0.1);
        let f = sig(-0.2 * x + 0.2);
        let g = (0.5 * x - 0.1).tanh();
        let o = sig(0.7 * x);
        let c = f * 0.0 + i * g;
        let h = o * c.tanh();
        assert!((cache.c[1][0] - c).abs() < 1e-15);
        assert!((cache.h[0][0] - h).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut layer: LstmLayer<f64> = LstmLayer::new(4, 3, &mut rng);
        let xs: Vec<Vec<f64>> = (0..3)
            .map(|t| (0..4).map(|j| ((t * 13 + j * 5) % 9) as f64 * 0.2 - 0.8).collect())
            .collect();
        let loss_of = |layer: &LstmLayer<f64>| -> f64 {
            let cache = layer.forward_seq(&xs);
            cache.h.iter().flatten().map(|v| v * v).sum()
        };
        let cache = layer.forward_seq(&xs);
        let dh: Vec<Vec<f64>> =
            cache.h.iter().map(|h| h.iter().map(|v| 2.0 * v).collect()).collect();
        layer.zero_grads();
        let dxs = layer.backward_seq(&cache, &dh);

        fn poke(layer: &mut LstmLayer<f64>, name: &str, j: usize, delta: f64) {
            let mut apply = |n: &str, p: &mut Tensor<f64>, _: &mut Tensor<f64>| {
                if n == name {
                    p.data_mut()[j] += delta;
                }
            };
            layer.visit_params(&mut apply);
        }
        let eps = 1e-5;
        let mut order = Vec::new();
        let mut collect = |name: &str, p: &mut Tensor<f64>, g: &mut Tensor<f64>| {
            order.push((name.to_string(), p.data().len(), g.data().to_vec()));
        };
        layer.visit_params(&mut collect);
        for (name, len, grads) in &order {
            for j in 0..*len {
                poke(&mut layer, name, j, eps);
                let up = loss_of(&layer);
                poke(&mut layer, name, j, -2.0 * eps);
                let down = loss_of(&layer);
                poke(&mut layer, name, j, eps);
                let num = (up - down) / (2.0 * eps);
                let got = grads[j];
                let denom = (num.abs() + got.abs()).max(1.0);
                assert!(
                    (num - got).abs() / denom < 1e-6,
                    "{name}[{j}]: numeric {num} analytic {got}"
                );
            }
        }
        for t in 0..xs.len() {
            for j in 0..4 {
                let mut xs2 = xs.clone();
                xs2[t][j] += eps;
                let up: f64 = layer.forward_seq(&xs2).h.iter().flatten().map(|v| v * v).sum();
                xs2[t][j] -= 2.0 * eps;
                let down: f64 = layer.forward_seq(&xs2).h.iter().flatten().map(|v| v * v).sum();
                let num = (up - down) / (2.0 * eps);
                let got = dxs[t][j];
                let denom = (num.abs() + got.abs()).max(1.0);
                assert!((num - got).abs() / denom < 1e-6, "dx[{t}][{j}]");
            }
        }
    }
}
