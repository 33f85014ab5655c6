use super::{Mode, Scalar, Tensor};
use crate::rng::Rng;
use crate::{Error, Result};

pub fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// Logistic function, evaluated without overflow for large |x|.
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Softmax of one logit vector, shifted by its max before exponentiation.
pub fn softmax<T: Scalar>(z: &[T]) -> Vec<T> {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Row-wise softmax of a `[n, c]` batch.
pub fn softmax_rows<T: Scalar>(z: &Tensor<T>) -> Result<Tensor<T>> {
    let (_, c) = z.dims2()?;
    let data: Vec<T> = z.data().chunks(c).flat_map(softmax).collect();
    Tensor::new(z.shape().to_vec(), data)
}

#[derive(Clone, Debug, Default)]
pub struct Relu<T> {
    mask: Option<Vec<bool>>,
    _t: std::marker::PhantomData<T>,
}

impl<T: Scalar> Relu<T> {
    pub fn new() -> Self {
        Relu { mask: None, _t: std::marker::PhantomData }
    }

    pub fn forward(&mut self, x: &Tensor<T>) -> Tensor<T> {
        self.mask = Some(x.data().iter().map(|&v| v > T::zero()).collect());
        relu(x)
    }

    pub fn backward(&mut self, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        let mask =
            self.mask.take().ok_or_else(|| Error::Usage("relu backward called without a forward cache".into()))?;
        if mask.len() != grad_out.len() {
            return Err(Error::Config("relu grad_out shape mismatch".into()));
        }
        let g = grad_out.data().iter().zip(&mask).map(|(&g, &m)| if m { g } else { T::zero() }).collect();
        Tensor::new(grad_out.shape().to_vec(), g)
    }
}

/// Inverted dropout: in train mode each unit is zeroed with probability
/// `rate` and survivors are scaled by `1/(1 − rate)`; inference is identity.
#[derive(Clone, Debug)]
pub struct Dropout<T> {
    rate: f64,
    mask: Option<Vec<T>>,
}

impl<T: Scalar> Dropout<T> {
    pub fn new(rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Config(format!("dropout rate must be in [0, 1), got {rate}")));
        }
        Ok(Dropout { rate, mask: None })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode, rng: &mut Rng) -> Tensor<T> {
        if mode == Mode::Infer || self.rate == 0.0 {
            self.mask = None;
            return x.clone();
        }
        let keep = T::lit(1.0 / (1.0 - self.rate));
        let mask: Vec<T> = (0..x.len()).map(|_| if rng.uniform() < self.rate { T::zero() } else { keep }).collect();
        let data = x.data().iter().zip(&mask).map(|(&v, &m)| v * m).collect();
        self.mask = Some(mask);
        Tensor::new(x.shape().to_vec(), data).expect("shape preserved")
    }

    pub fn backward(&mut self, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        match self.mask.take() {
            None => Ok(grad_out.clone()),
            Some(mask) => {
                let data = grad_out.data().iter().zip(&mask).map(|(&g, &m)| g * m).collect();
                Tensor::new(grad_out.shape().to_vec(), data)
            }
        }
    }
}
