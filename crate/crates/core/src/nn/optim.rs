//! RMSProp: per-parameter running average of squared gradients.

use super::{ParamVisitor, Scalar, Tensor};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RmsPropConfig {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        Self { learning_rate: 0.001, rho: 0.9, epsilon: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct RmsProp<F> {
    pub config: RmsPropConfig,
    /// Squared-gradient averages, one buffer per visited tensor, allocated
    /// on first use in visitation order.
    state: Vec<Vec<F>>,
}

impl<F: Scalar> RmsProp<F> {
    pub fn new(config: RmsPropConfig) -> Self {
        Self { config, state: Vec::new() }
    }

    /// One update over a model's parameters. Call through the model's
    /// visitation so the state stays aligned; the visitation order must not
    /// change between steps.
    pub fn step(&mut self, visit: impl FnOnce(&mut StepVisitor<'_, F>)) {
        let mut visitor = StepVisitor { optim: self, index: 0 };
        visit(&mut visitor);
    }
}

pub struct StepVisitor<'a, F> {
    optim: &'a mut RmsProp<F>,
    index: usize,
}

impl<F: Scalar> ParamVisitor<F> for StepVisitor<'_, F> {
    fn visit(&mut self, _name: &str, param: &mut Tensor<F>, grad: &mut Tensor<F>) {
        let idx = self.index;
        self.index += 1;
        if self.optim.state.len() <= idx {
            self.optim.state.push(vec![F::ZERO; param.len()]);
        }
        let avg = &mut self.optim.state[idx];
        debug_assert_eq!(avg.len(), param.len(), "optimizer state misaligned");
        let rho = F::from_f64(self.optim.config.rho);
        let one_minus = F::from_f64(1.0 - self.optim.config.rho);
        let lr = F::from_f64(self.optim.config.learning_rate);
        let eps = F::from_f64(self.optim.config.epsilon);
        let p = param.data_mut();
        let g = grad.data();
        for j in 0..p.len() {
            avg[j] = rho * avg[j] + one_minus * g[j] * g[j];
            p[j] -= lr * g[j] / (avg[j].sqrt() + eps);
        }
    }
}
