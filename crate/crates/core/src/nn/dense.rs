//! Fully connected layer.

use super::{ParamVisitor, Scalar, Tensor};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Dense<F> {
    pub in_dim: usize,
    pub out_dim: usize,
    w: Tensor<F>,
    bias: Tensor<F>,
    gw: Tensor<F>,
    gbias: Tensor<F>,
}

impl<F: Scalar> Dense<F> {
    pub fn new(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let mut w = Tensor::zeros(&[out_dim, in_dim]);
        for v in w.data_mut() {
            *v = F::from_f64(rng.gen_range(-limit..limit));
        }
        let bias = Tensor::zeros(&[out_dim]);
        Self {
            in_dim,
            out_dim,
            gw: Tensor::zeros(w.shape()),
            gbias: Tensor::zeros(bias.shape()),
            w,
            bias,
        }
    }

    pub fn forward(&self, x: &[F]) -> Vec<F> {
        debug_assert_eq!(x.len(), self.in_dim);
        let w = self.w.data();
        let mut out = self.bias.data().to_vec();
        for (row, o) in out.iter_mut().enumerate() {
            let wrow = &w[row * self.in_dim..(row + 1) * self.in_dim];
            let mut acc = F::ZERO;
            for (wv, xv) in wrow.iter().zip(x) {
                acc += *wv * *xv;
            }
            *o += acc;
        }
        out
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, x: &[F], dout: &[F]) -> Vec<F> {
        let mut dx = vec![F::ZERO; self.in_dim];
        let w = self.w.data();
        let gw = self.gw.data_mut();
        let gb = self.gbias.data_mut();
        for row in 0..self.out_dim {
            let d = dout[row];
            gb[row] += d;
            if d == F::ZERO {
                continue;
            }
            let wrow = &w[row * self.in_dim..(row + 1) * self.in_dim];
            let grow = &mut gw[row * self.in_dim..(row + 1) * self.in_dim];
            for j in 0..self.in_dim {
                grow[j] += d * x[j];
                dx[j] += d * wrow[j];
            }
        }
        dx
    }

    pub fn zero_grads(&mut self) {
        self.gw.fill(F::ZERO);
        self.gbias.fill(F::ZERO);
    }

    pub fn visit_params(&mut self, visitor: &mut impl ParamVisitor<F>) {
        visitor.visit("w", &mut self.w, &mut self.gw);
        visitor.visit("bias", &mut self.bias, &mut self.gbias);
    }
}
