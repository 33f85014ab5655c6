use super::{Mode, Scalar, Tensor};
use crate::{Error, Result};

/// Per-channel batch normalization. The channel axis is the last one;
/// statistics run over every other axis (batch and, for images, space).
#[derive(Clone, Debug)]
pub struct BatchNorm<T> {
    pub(crate) gamma: Tensor<T>,
    pub(crate) beta: Tensor<T>,
    pub(crate) running_mean: Tensor<T>,
    pub(crate) running_var: Tensor<T>,
    pub(crate) grad_gamma: Tensor<T>,
    pub(crate) grad_beta: Tensor<T>,
    momentum: f64,
    epsilon: f64,
    cache: Option<BnCache<T>>,
}

#[derive(Clone, Debug)]
struct BnCache<T> {
    x_hat: Vec<T>,
    inv_std: Vec<T>,
    shape: Vec<usize>,
}

pub const BN_MOMENTUM: f64 = 0.99;
pub const BN_EPSILON: f64 = 1e-3;

impl<T: Scalar> BatchNorm<T> {
    pub fn new(channels: usize) -> Self {
        Self::with_params(channels, BN_MOMENTUM, BN_EPSILON).expect("default batch-norm params are valid")
    }

    pub fn with_params(channels: usize, momentum: f64, epsilon: f64) -> Result<Self> {
        if !(momentum > 0.0 && momentum < 1.0) || epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "batch-norm needs momentum in (0,1) and epsilon > 0, got {momentum}, {epsilon}"
            )));
        }
        Ok(BatchNorm {
            gamma: Tensor::full(&[channels], T::one()),
            beta: Tensor::zeros(&[channels]),
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::full(&[channels], T::one()),
            grad_gamma: Tensor::zeros(&[channels]),
            grad_beta: Tensor::zeros(&[channels]),
            momentum,
            epsilon,
            cache: None,
        })
    }

    pub(crate) fn from_parts(
        gamma: Tensor<T>,
        beta: Tensor<T>,
        running_mean: Tensor<T>,
        running_var: Tensor<T>,
        momentum: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let c = gamma.len();
        let mut bn = Self::with_params(c, momentum, epsilon)?;
        for t in [&beta, &running_mean, &running_var] {
            if t.len() != c {
                return Err(Error::Config(format!(
                    "batch-norm tensors disagree on channel count ({c} vs {})",
                    t.len()
                )));
            }
        }
        if running_var.data().iter().any(|&v| v < T::zero()) {
            return Err(Error::Config("batch-norm running variance must be ≥ 0".into()));
        }
        bn.gamma = gamma;
        bn.beta = beta;
        bn.running_mean = running_mean;
        bn.running_var = running_var;
        Ok(bn)
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }
    pub fn momentum(&self) -> f64 {
        self.momentum
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn gamma_mut(&mut self) -> &mut Tensor<T> {
        &mut self.gamma
    }
    pub fn beta_mut(&mut self) -> &mut Tensor<T> {
        &mut self.beta
    }
    pub fn running_mean(&self) -> &Tensor<T> {
        &self.running_mean
    }
    pub fn running_var(&self) -> &Tensor<T> {
        &self.running_var
    }

    fn check(&self, x: &Tensor<T>) -> Result<usize> {
        let c = self.channels();
        if x.shape().last() != Some(&c) {
            return Err(Error::Config(format!("batch-norm over {c} channels got shape {:?}", x.shape())));
        }
        Ok(c)
    }

    pub fn infer(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let c = self.check(x)?;
        let eps = T::lit(self.epsilon);
        let scale: Vec<T> = (0..c).map(|d| self.gamma.data()[d] / (self.running_var.data()[d] + eps).sqrt()).collect();
        let mut out = x.data().to_vec();
        for row in out.chunks_mut(c) {
            for d in 0..c {
                row[d] = (row[d] - self.running_mean.data()[d]) * scale[d] + self.beta.data()[d];
            }
        }
        Tensor::new(x.shape().to_vec(), out)
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        if mode == Mode::Infer {
            return self.infer(x);
        }
        let c = self.check(x)?;
        if x.batch() < 2 {
            return Err(Error::Usage("batch-norm in train mode needs a batch of at least 2".into()));
        }
        let rows = x.len() / c;
        let count = T::lit(rows as f64);
        let mut mean = vec![T::zero(); c];
        for row in x.data().chunks(c) {
            for d in 0..c {
                mean[d] = mean[d] + row[d];
            }
        }
        mean.iter_mut().for_each(|m| *m = *m / count);
        let mut var = vec![T::zero(); c];
        for row in x.data().chunks(c) {
            for d in 0..c {
                let dv = row[d] - mean[d];
                var[d] = var[d] + dv * dv;
            }
        }
        var.iter_mut().for_each(|v| *v = *v / count);
        let eps = T::lit(self.epsilon);
        let inv_std: Vec<T> = var.iter().map(|&v| T::one() / (v + eps).sqrt()).collect();

        let mut x_hat = x.data().to_vec();
        let mut out = vec![T::zero(); x.len()];
        for (xr, yr) in x_hat.chunks_mut(c).zip(out.chunks_mut(c)) {
            for d in 0..c {
                xr[d] = (xr[d] - mean[d]) * inv_std[d];
                yr[d] = xr[d] * self.gamma.data()[d] + self.beta.data()[d];
            }
        }

        let mom = T::lit(self.momentum);
        let rest = T::lit(1.0 - self.momentum);
        for d in 0..c {
            let rm = &mut self.running_mean.data_mut()[d];
            *rm = mom * *rm + rest * mean[d];
            let rv = &mut self.running_var.data_mut()[d];
            *rv = mom * *rv + rest * var[d];
        }
        self.cache = Some(BnCache { x_hat, inv_std, shape: x.shape().to_vec() });
        Tensor::new(x.shape().to_vec(), out)
    }

    pub fn backward(&mut self, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        let cache =
            self.cache.take().ok_or_else(|| Error::Usage("batch-norm backward needs a train-mode forward".into()))?;
        if grad_out.shape() != cache.shape.as_slice() {
            return Err(Error::Config("batch-norm grad_out shape mismatch".into()));
        }
        let c = self.channels();
        let rows = grad_out.len() / c;
        let count = T::lit(rows as f64);
        let mut gbeta = vec![T::zero(); c];
        let mut ggamma = vec![T::zero(); c];
        for (gr, xr) in grad_out.data().chunks(c).zip(cache.x_hat.chunks(c)) {
            for d in 0..c {
                gbeta[d] = gbeta[d] + gr[d];
                ggamma[d] = ggamma[d] + gr[d] * xr[d];
            }
        }
        // dx = γ·inv_std/N · (N·g − Σg − x̂·Σ(g·x̂))
        let mut gin = vec![T::zero(); grad_out.len()];
        for ((gr, xr), out) in grad_out.data().chunks(c).zip(cache.x_hat.chunks(c)).zip(gin.chunks_mut(c)) {
            for d in 0..c {
                let k = self.gamma.data()[d] * cache.inv_std[d] / count;
                out[d] = k * (count * gr[d] - gbeta[d] - xr[d] * ggamma[d]);
            }
        }
        self.grad_beta = Tensor::new(vec![c], gbeta)?;
        self.grad_gamma = Tensor::new(vec![c], ggamma)?;
        Tensor::new(cache.shape, gin)
    }
}

/// Fixed per-feature affine rescaling `(x − mean) / std` over the last axis.
/// Not trainable; fitted once on training data.
#[derive(Clone, Debug)]
pub struct Standardize<T> {
    pub(crate) mean: Tensor<T>,
    pub(crate) std: Tensor<T>,
}

impl<T: Scalar> Standardize<T> {
    pub fn identity(width: usize) -> Self {
        Standardize { mean: Tensor::zeros(&[width]), std: Tensor::full(&[width], T::one()) }
    }

    pub fn from_parts(mean: Tensor<T>, std: Tensor<T>) -> Result<Self> {
        if mean.shape() != std.shape() || mean.rank() != 1 {
            return Err(Error::Config("standardize mean/std must be equal-length vectors".into()));
        }
        if std.data().iter().any(|&s| s <= T::zero() || !s.is_finite()) {
            return Err(Error::Config("standardize std must be positive and finite".into()));
        }
        Ok(Standardize { mean, std })
    }

    /// Population mean/std per column of a `[n, width]` batch; zero std becomes 1.
    pub fn fit(x: &Tensor<T>) -> Result<Self> {
        let (n, f) = x.dims2()?;
        let mut mean = vec![0.0; f];
        for row in x.data().chunks(f) {
            for d in 0..f {
                mean[d] += row[d].as_f64();
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; f];
        for row in x.data().chunks(f) {
            for d in 0..f {
                var[d] += (row[d].as_f64() - mean[d]).powi(2);
            }
        }
        let std: Vec<f64> = var
            .iter()
            .map(|v| {
                let s = (v / n as f64).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self::from_parts(Tensor::from_f64(vec![f], &mean)?, Tensor::from_f64(vec![f], &std)?)
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn infer(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let f = self.width();
        if x.shape().last() != Some(&f) {
            return Err(Error::Config(format!("standardize over {f} features got shape {:?}", x.shape())));
        }
        let mut out = x.data().to_vec();
        for row in out.chunks_mut(f) {
            for d in 0..f {
                row[d] = (row[d] - self.mean.data()[d]) / self.std.data()[d];
            }
        }
        Tensor::new(x.shape().to_vec(), out)
    }

    pub fn backward(&self, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        let f = self.width();
        let mut g = grad_out.data().to_vec();
        for row in g.chunks_mut(f) {
            for d in 0..f {
                row[d] = row[d] / self.std.data()[d];
            }
        }
        Tensor::new(grad_out.shape().to_vec(), g)
    }
}
