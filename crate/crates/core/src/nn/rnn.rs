//! Plain tanh recurrent layer.

use super::{ParamVisitor, Scalar, Tensor};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RnnLayer<F> {
    pub in_dim: usize,
    pub hidden: usize,
    w_x: Tensor<F>,
    w_h: Tensor<F>,
    bias: Tensor<F>,
    gw_x: Tensor<F>,
    gw_h: Tensor<F>,
    gbias: Tensor<F>,
}

pub struct RnnCache<F> {
    xs: Vec<Vec<F>>,
    pub h: Vec<Vec<F>>,
}

impl<F: Scalar> RnnLayer<F> {
    pub fn new(in_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit_x = (6.0 / (in_dim + hidden) as f64).sqrt();
        let limit_h = (6.0 / (2 * hidden) as f64).sqrt();
        let mut w_x = Tensor::zeros(&[hidden, in_dim]);
        for v in w_x.data_mut() {
            *v = F::from_f64(rng.gen_range(-limit_x..limit_x));
        }
        let mut w_h = Tensor::zeros(&[hidden, hidden]);
        for v in w_h.data_mut() {
            *v = F::from_f64(rng.gen_range(-limit_h..limit_h));
        }
        let bias = Tensor::zeros(&[hidden]);
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

    pub fn forward_seq(&self, xs: &[Vec<F>]) -> RnnCache<F> {
        let h = self.hidden;
        let mut cache = RnnCache { xs: xs.to_vec(), h: Vec::new() };
        let mut h_prev = vec![F::ZERO; h];
        for x in xs {
            let mut h_t = self.bias.data().to_vec();
            let wx = self.w_x.data();
            let wh = self.w_h.data();
            for j in 0..h {
                let mut acc = h_t[j];
                let wrow = &wx[j * self.in_dim..(j + 1) * self.in_dim];
                for (wv, xv) in wrow.iter().zip(x) {
                    acc += *wv * *xv;
                }
                let hrow = &wh[j * h..(j + 1) * h];
                for (wv, hv) in hrow.iter().zip(&h_prev) {
                    acc += *wv * *hv;
                }
                h_t[j] = acc.tanh();
            }
            cache.h.push(h_t.clone());
            h_prev = h_t;
        }
        cache
    }

    pub fn backward_seq(&mut self, cache: &RnnCache<F>, dh_seq: &[Vec<F>]) -> Vec<Vec<F>> {
        let h = self.hidden;
        let steps = cache.h.len();
        let mut dxs = vec![vec![F::ZERO; self.in_dim]; steps];
        let mut dh_next = vec![F::ZERO; h];
        for t in (0..steps).rev() {
            let h_t = &cache.h[t];
            let mut d_pre = vec![F::ZERO; h];
            for j in 0..h {
                let dh = dh_seq[t][j] + dh_next[j];
                d_pre[j] = dh * (F::ONE - h_t[j] * h_t[j]);
            }
            let x = &cache.xs[t];
            let zero_h;
            let h_prev: &[F] = if t > 0 {
                &cache.h[t - 1]
            } else {
                zero_h = vec![F::ZERO; h];
                &zero_h
            };
            let mut dh_prev = vec![F::ZERO; h];
            let gb = self.gbias.data_mut();
            let gwx = self.gw_x.data_mut();
            let gwh = self.gw_h.data_mut();
            let wx = self.w_x.data();
            let wh = self.w_h.data();
            for j in 0..h {
                let d = d_pre[j];
                if d == F::ZERO {
                    continue;
                }
                gb[j] += d;
                let grow = &mut gwx[j * self.in_dim..(j + 1) * self.in_dim];
                for (gv, xv) in grow.iter_mut().zip(x) {
                    *gv += d * *xv;
                }
                let wrow = &wx[j * self.in_dim..(j + 1) * self.in_dim];
                for (dxj, wv) in dxs[t].iter_mut().zip(wrow) {
                    *dxj += d * *wv;
                }
                let ghrow = &mut gwh[j * h..(j + 1) * h];
                for (gv, hv) in ghrow.iter_mut().zip(h_prev) {
                    *gv += d * *hv;
                }
                let whrow = &wh[j * h..(j + 1) * h];
                for (dj, wv) in dh_prev.iter_mut().zip(whrow) {
                    *dj += d * *wv;
                }
            }
            dh_next = dh_prev;
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
