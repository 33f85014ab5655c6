use super::{init_uniform, Init, Scalar, Tensor};
use crate::rng::Rng;
use crate::{Error, Result};

/// Fully connected layer `y = x·W + b` with `W: [in, out]`.
#[derive(Clone, Debug)]
pub struct Dense<T> {
    pub(crate) weights: Tensor<T>,
    pub(crate) bias: Tensor<T>,
    pub(crate) grad_weights: Tensor<T>,
    pub(crate) grad_bias: Tensor<T>,
    cache: Option<Tensor<T>>,
}

impl<T: Scalar> Dense<T> {
    pub fn new(inputs: usize, outputs: usize, init: Init, rng: &mut Rng) -> Self {
        let w = init_uniform(&[inputs, outputs], init, inputs, outputs, rng);
        Self::from_parts(w, Tensor::zeros(&[outputs])).expect("consistent shapes")
    }

    pub fn from_parts(weights: Tensor<T>, bias: Tensor<T>) -> Result<Self> {
        if weights.rank() != 2 || bias.shape() != [weights.shape()[1]] {
            return Err(Error::Config(format!(
                "dense weights {:?} and bias {:?} are inconsistent",
                weights.shape(),
                bias.shape()
            )));
        }
        Ok(Dense {
            grad_weights: Tensor::zeros(weights.shape()),
            grad_bias: Tensor::zeros(bias.shape()),
            weights,
            bias,
            cache: None,
        })
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[0]
    }
    pub fn outputs(&self) -> usize {
        self.weights.shape()[1]
    }
    pub fn weights(&self) -> &Tensor<T> {
        &self.weights
    }
    pub fn weights_mut(&mut self) -> &mut Tensor<T> {
        &mut self.weights
    }
    pub fn bias_mut(&mut self) -> &mut Tensor<T> {
        &mut self.bias
    }

    pub fn infer(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (n, f) = x.dims2()?;
        if f != self.inputs() {
            return Err(Error::Config(format!("dense layer expects width {}, got {f}", self.inputs())));
        }
        let out_w = self.outputs();
        let mut out = Vec::with_capacity(n * out_w);
        for _ in 0..n {
            out.extend_from_slice(self.bias.data());
        }
        T::gemm(n, f, out_w, x.data(), false, self.weights.data(), false, &mut out, true);
        Tensor::new(vec![n, out_w], out)
    }

    pub fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let y = self.infer(x)?;
        self.cache = Some(x.clone());
        Ok(y)
    }

    pub fn backward(&mut self, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        let x =
            self.cache.take().ok_or_else(|| Error::Usage("dense backward called without a forward cache".into()))?;
        let (n, f) = x.dims2()?;
        let out_w = self.outputs();
        if grad_out.shape() != [n, out_w] {
            return Err(Error::Config(format!(
                "dense grad_out shape {:?}, expected {:?}",
                grad_out.shape(),
                [n, out_w]
            )));
        }
        let mut gw = vec![T::zero(); f * out_w];
        T::gemm(f, n, out_w, x.data(), true, grad_out.data(), false, &mut gw, false);
        let mut gb = vec![T::zero(); out_w];
        for row in grad_out.data().chunks(out_w) {
            for (a, v) in gb.iter_mut().zip(row) {
                *a = *a + *v;
            }
        }
        let mut gx = vec![T::zero(); n * f];
        T::gemm(n, out_w, f, grad_out.data(), false, self.weights.data(), true, &mut gx, false);
        self.grad_weights = Tensor::new(vec![f, out_w], gw)?;
        self.grad_bias = Tensor::new(vec![out_w], gb)?;
        Tensor::new(vec![n, f], gx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights_pass_input() {
        let eye = Tensor::<f64>::from_fn(&[3, 3], |i| if i % 4 == 0 { 1.0 } else { 0.0 });
        let d = Dense::from_parts(eye, Tensor::zeros(&[3])).unwrap();
        let x = Tensor::new(vec![2, 3], vec![1.0, -2.0, 3.0, 4.0, 5.0, -6.0]).unwrap();
        assert_eq!(d.infer(&x).unwrap(), x);
    }

    #[test]
    fn width_mismatch_is_config_error() {
        let mut rng = Rng::new(0);
        let d = Dense::<f64>::new(4, 2, Init::HeUniform, &mut rng);
        assert!(matches!(d.infer(&Tensor::zeros(&[1, 3])), Err(Error::Config(_))));
    }
}
