//! Minimal neural-network engine: tensors, layers with hand-written backward
//! passes, cross-entropy losses, Adam and a finite-difference checker.

pub mod activation;
pub mod adam;
pub mod checkpoint;
pub mod conv;
pub mod dense;
pub mod gradcheck;
pub mod loss;
pub mod norm;
pub mod pool;
mod scalar;
pub mod sequential;
mod tensor;

pub use activation::{relu, sigmoid, softmax, softmax_rows, Dropout, Relu};
pub use adam::Adam;
pub use conv::{Conv2d, Padding};
pub use dense::Dense;
pub use norm::{BatchNorm, Standardize};
pub use pool::{GlobalAvgPool, MaxPool2d};
pub use scalar::{DType, Scalar};
pub use sequential::{Layer, LayerKind, Param, Sequential};
pub use tensor::Tensor;

use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Weight initialisation schemes. Biases always start at zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    /// `U(−√(6/fan_in), √(6/fan_in))`, for layers followed by ReLU.
    HeUniform,
    /// `U(−√(6/(fan_in+fan_out)), …)`, for output layers.
    XavierUniform,
}

pub(crate) fn init_uniform<T: Scalar>(
    shape: &[usize],
    init: Init,
    fan_in: usize,
    fan_out: usize,
    rng: &mut Rng,
) -> Tensor<T> {
    let limit = match init {
        Init::HeUniform => (6.0 / fan_in as f64).sqrt(),
        Init::XavierUniform => (6.0 / (fan_in + fan_out) as f64).sqrt(),
    };
    Tensor::from_fn(shape, |_| T::lit(rng.uniform_range(-limit, limit)))
}
