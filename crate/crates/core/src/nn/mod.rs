//! Minimal dependency-free neural engine.
//!
//! Layers implement hand-derived backward passes; everything is generic over
//! the scalar type so training runs in f32 while gradient checks run the
//! same code in f64. All loops use a fixed accumulation order, so results
//! are deterministic for a given seed.

pub mod conv;
pub mod convlstm;
pub mod dense;
pub mod dropout;
pub mod loss;
pub mod lstm;
pub mod optim;
pub mod rnn;

pub use convlstm::ConvLstmCell;
pub use dense::Dense;
pub use dropout::{dropout_backward, dropout_forward, DropoutMode};
pub use loss::mse_loss;
pub use lstm::LstmLayer;
pub use optim::RmsProp;
pub use rnn::RnnLayer;

use crate::error::{CoreError, Result};

/// Floating-point scalar the engine is generic over.
pub trait Scalar:
    Copy
    + PartialOrd
    + core::fmt::Debug
    + Send
    + Sync
    + 'static
    + core::ops::Add<Output = Self>
    + core::ops::Sub<Output = Self>
    + core::ops::Mul<Output = Self>
    + core::ops::Div<Output = Self>
    + core::ops::Neg<Output = Self>
    + core::ops::AddAssign
    + core::ops::SubAssign
    + core::ops::MulAssign
{
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn exp(self) -> Self;
    fn tanh(self) -> Self;
    fn sqrt(self) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f32 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
    fn exp(self) -> Self {
        f32::exp(self)
    }
    fn tanh(self) -> Self {
        f32::tanh(self)
    }
    fn sqrt(self) -> Self {
        f32::sqrt(self)
    }
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

pub fn sigmoid<F: Scalar>(x: F) -> F {
    F::ONE / (F::ONE + (-x).exp())
}

/// Dense multi-dimensional array with an immutable shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<F> {
    shape: Vec<usize>,
    data: Vec<F>,
}

impl<F: Scalar> Tensor<F> {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Self { shape: shape.to_vec(), data: vec![F::ZERO; len] }
    }

    pub fn from_vec(shape: &[usize], data: Vec<F>) -> Result<Self> {
        let expect: usize = shape.iter().product();
        if data.len() != expect {
            return Err(CoreError::Shape(format!(
                "tensor of shape {shape:?} needs {expect} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape: shape.to_vec(), data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn fill(&mut self, v: F) {
        self.data.iter_mut().for_each(|x| *x = v);
    }
}

/// A (parameter, gradient) pair handed to optimizers and serializers. The
/// visitation order is fixed per layer type, which pins both the optimizer
/// state alignment and the checkpoint blob layout.
pub trait ParamVisitor<F: Scalar> {
    fn visit(&mut self, name: &str, param: &mut Tensor<F>, grad: &mut Tensor<F>);
}

impl<F: Scalar, T: FnMut(&str, &mut Tensor<F>, &mut Tensor<F>)> ParamVisitor<F> for T {
    fn visit(&mut self, name: &str, param: &mut Tensor<F>, grad: &mut Tensor<F>) {
        self(name, param, grad)
    }
}
