use super::activation::{Dropout, Relu};
use super::conv::Conv2d;
use super::dense::Dense;
use super::norm::{BatchNorm, Standardize};
use super::pool::{GlobalAvgPool, MaxPool2d};
use super::{Mode, Scalar, Tensor};
use crate::par::Exec;
use crate::rng::Rng;
use crate::{Error, Result};

/// Mutable view of one trainable tensor and its current gradient.
pub struct Param<'a, T> {
    pub name: String,
    pub value: &'a mut Tensor<T>,
    pub grad: &'a Tensor<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Conv2d,
    MaxPool2d,
    BatchNorm,
    Dense,
    Relu,
    Dropout,
    GlobalAvgPool,
    Standardize,
}

impl LayerKind {
    /// Kinds that change the activation shape; used for shape audits.
    pub fn reshapes(self) -> bool {
        matches!(self, LayerKind::Conv2d | LayerKind::MaxPool2d | LayerKind::GlobalAvgPool | LayerKind::Dense)
    }
}

#[derive(Clone, Debug)]
pub enum Layer<T> {
    Conv2d(Conv2d<T>),
    MaxPool2d(MaxPool2d),
    BatchNorm(BatchNorm<T>),
    Dense(Dense<T>),
    Relu(Relu<T>),
    Dropout(Dropout<T>),
    GlobalAvgPool(GlobalAvgPool),
    Standardize(Standardize<T>),
}

impl<T: Scalar> Layer<T> {
    pub fn kind(&self) -> LayerKind {
        match self {
            Layer::Conv2d(_) => LayerKind::Conv2d,
            Layer::MaxPool2d(_) => LayerKind::MaxPool2d,
            Layer::BatchNorm(_) => LayerKind::BatchNorm,
            Layer::Dense(_) => LayerKind::Dense,
            Layer::Relu(_) => LayerKind::Relu,
            Layer::Dropout(_) => LayerKind::Dropout,
            Layer::GlobalAvgPool(_) => LayerKind::GlobalAvgPool,
            Layer::Standardize(_) => LayerKind::Standardize,
        }
    }

    /// Per-sample output shape for a per-sample input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let spatial = || -> Result<(usize, usize, usize)> {
            match input {
                [h, w, c] => Ok((*h, *w, *c)),
                _ => Err(Error::Config(format!("expected an h×w×c input, got {input:?}"))),
            }
        };
        match self {
            Layer::Conv2d(c) => {
                let (h, w, d) = spatial()?;
                if d != c.in_channels() {
                    return Err(Error::Config(format!("conv expects {} channels, got {d}", c.in_channels())));
                }
                let (oh, ow) = c.output_hw(h, w)?;
                Ok(vec![oh, ow, c.out_channels()])
            }
            Layer::MaxPool2d(p) => {
                let (h, w, d) = spatial()?;
                let (oh, ow) = p.output_hw(h, w)?;
                Ok(vec![oh, ow, d])
            }
            Layer::GlobalAvgPool(_) => Ok(vec![spatial()?.2]),
            Layer::Dense(d) => match input {
                [f] if *f == d.inputs() => Ok(vec![d.outputs()]),
                _ => Err(Error::Config(format!("dense layer expects width {}, got {input:?}", d.inputs()))),
            },
            Layer::BatchNorm(b) if input.last() != Some(&b.channels()) => {
                Err(Error::Config(format!("batch-norm over {} channels got {input:?}", b.channels())))
            }
            Layer::Standardize(s) if input.last() != Some(&s.width()) => {
                Err(Error::Config(format!("standardize over {} features got {input:?}", s.width())))
            }
            _ => Ok(input.to_vec()),
        }
    }

    pub fn infer(&self, x: &Tensor<T>, exec: Exec) -> Result<Tensor<T>> {
        match self {
            Layer::Conv2d(l) => l.infer(x, exec),
            Layer::MaxPool2d(l) => l.infer(x),
            Layer::BatchNorm(l) => l.infer(x),
            Layer::Dense(l) => l.infer(x),
            Layer::Relu(_) => Ok(super::activation::relu(x)),
            Layer::Dropout(_) => Ok(x.clone()),
            Layer::GlobalAvgPool(l) => l.infer(x),
            Layer::Standardize(l) => l.infer(x),
        }
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode, rng: &mut Rng, exec: Exec) -> Result<Tensor<T>> {
        match self {
            Layer::Conv2d(l) => l.forward(x, exec),
            Layer::MaxPool2d(l) => l.forward(x),
            Layer::BatchNorm(l) => l.forward(x, mode),
            Layer::Dense(l) => l.forward(x),
            Layer::Relu(l) => Ok(l.forward(x)),
            Layer::Dropout(l) => Ok(l.forward(x, mode, rng)),
            Layer::GlobalAvgPool(l) => l.forward(x),
            Layer::Standardize(l) => l.infer(x),
        }
    }

    pub fn backward(&mut self, g: &Tensor<T>, exec: Exec) -> Result<Tensor<T>> {
        match self {
            Layer::Conv2d(l) => l.backward(g, exec),
            Layer::MaxPool2d(l) => l.backward(g),
            Layer::BatchNorm(l) => l.backward(g),
            Layer::Dense(l) => l.backward(g),
            Layer::Relu(l) => l.backward(g),
            Layer::Dropout(l) => l.backward(g),
            Layer::GlobalAvgPool(l) => l.backward(g),
            Layer::Standardize(l) => l.backward(g),
        }
    }

    fn params(&mut self, index: usize) -> Vec<Param<'_, T>> {
        let p = |name: &str, value, grad| Param { name: format!("layer{index}.{name}"), value, grad };
        match self {
            Layer::Conv2d(l) => {
                vec![p("conv.kernel", &mut l.kernel, &l.grad_kernel), p("conv.bias", &mut l.bias, &l.grad_bias)]
            }
            Layer::BatchNorm(l) => {
                vec![p("batchnorm.gamma", &mut l.gamma, &l.grad_gamma), p("batchnorm.beta", &mut l.beta, &l.grad_beta)]
            }
            Layer::Dense(l) => {
                vec![p("dense.weights", &mut l.weights, &l.grad_weights), p("dense.bias", &mut l.bias, &l.grad_bias)]
            }
            _ => Vec::new(),
        }
    }
}

/// Ordered layer stack with a fixed per-sample input shape.
#[derive(Clone, Debug)]
pub struct Sequential<T> {
    input_shape: Vec<usize>,
    layers: Vec<Layer<T>>,
    exec: Exec,
}

impl<T: Scalar> Sequential<T> {
    /// Validates that the stack composes for `input_shape`.
    pub fn new(input_shape: Vec<usize>, layers: Vec<Layer<T>>) -> Result<Self> {
        let net = Sequential { input_shape, layers, exec: Exec::default() };
        net.shape_trace()?;
        Ok(net)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn set_exec(&mut self, exec: Exec) {
        self.exec = exec;
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    /// Per-sample output shape after every layer.
    pub fn shape_trace(&self) -> Result<Vec<(LayerKind, Vec<usize>)>> {
        let mut shape = self.input_shape.clone();
        let mut out = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            shape = l.output_shape(&shape)?;
            out.push((l.kind(), shape.clone()));
        }
        Ok(out)
    }

    pub fn output_shape(&self) -> Result<Vec<usize>> {
        Ok(self.shape_trace()?.last().map(|(_, s)| s.clone()).unwrap_or_else(|| self.input_shape.clone()))
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        if x.rank() != self.input_shape.len() + 1 || x.sample_shape() != self.input_shape.as_slice() {
            return Err(Error::Usage(format!("model expects batches of {:?}, got {:?}", self.input_shape, x.shape())));
        }
        Ok(())
    }

    /// Inference-mode forward pass. Takes `&self`; no caches are written.
    pub fn infer(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_input(x)?;
        let mut h = x.clone();
        for l in &self.layers {
            h = l.infer(&h, self.exec)?;
        }
        Ok(h)
    }

    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode, rng: &mut Rng) -> Result<Tensor<T>> {
        self.check_input(x)?;
        let mut h = x.clone();
        for l in &mut self.layers {
            h = l.forward(&h, mode, rng, self.exec)?;
        }
        Ok(h)
    }

    /// Backpropagates `grad` (w.r.t. the output) and returns the input gradient.
    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let mut g = grad.clone();
        for l in self.layers.iter_mut().rev() {
            g = l.backward(&g, self.exec)?;
        }
        Ok(g)
    }

    pub fn params(&mut self) -> Vec<Param<'_, T>> {
        self.layers.iter_mut().enumerate().flat_map(|(i, l)| l.params(i)).collect()
    }

    /// Number of trainable scalars.
    pub fn parameter_count(&mut self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    /// Flat copy of every trainable value, in `params()` order.
    pub fn flat_params(&mut self) -> Vec<T> {
        self.params().into_iter().flat_map(|p| p.value.data().to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Init, Padding};

    fn tiny(rng: &mut Rng) -> Sequential<f64> {
        Sequential::new(
            vec![6, 6, 2],
            vec![
                Layer::Conv2d(Conv2d::new(3, 2, 4, 1, Padding::Valid, Init::HeUniform, rng).unwrap()),
                Layer::Relu(Relu::new()),
                Layer::MaxPool2d(MaxPool2d::new(2, 2).unwrap()),
                Layer::GlobalAvgPool(GlobalAvgPool::new()),
                Layer::Dense(Dense::new(4, 3, Init::XavierUniform, rng)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn shape_trace_follows_layers() {
        let mut rng = Rng::new(0);
        let net = tiny(&mut rng);
        let shapes: Vec<Vec<usize>> = net.shape_trace().unwrap().into_iter().map(|(_, s)| s).collect();
        assert_eq!(shapes, vec![vec![4, 4, 4], vec![4, 4, 4], vec![2, 2, 4], vec![4], vec![3]]);
    }

    #[test]
    fn incompatible_stack_is_rejected() {
        let mut rng = Rng::new(0);
        let err = Sequential::<f64>::new(vec![4], vec![Layer::Dense(Dense::new(5, 2, Init::HeUniform, &mut rng))]);
        assert!(err.is_err());
    }

    #[test]
    fn forward_infer_agree_without_stochastic_layers() {
        let mut rng = Rng::new(1);
        let mut net = tiny(&mut rng);
        let x = Tensor::from_fn(&[3, 6, 6, 2], |i| ((i * 7) % 11) as f64 / 11.0);
        let a = net.infer(&x).unwrap();
        let b = net.forward(&x, Mode::Train, &mut rng).unwrap();
        assert_eq!(a, b);
        assert!(net.infer(&Tensor::zeros(&[1, 5, 6, 2])).is_err());
    }
}
