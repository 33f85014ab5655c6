use super::{Scalar, Tensor};
use crate::{Error, Result};

/// Max pooling over `window × window` regions with the given stride (valid).
#[derive(Clone, Debug)]
pub struct MaxPool2d {
    window: usize,
    stride: usize,
    cache: Option<(Vec<usize>, Vec<usize>)>,
}

impl MaxPool2d {
    pub fn new(window: usize, stride: usize) -> Result<Self> {
        if window == 0 || stride == 0 {
            return Err(Error::Config("pool window and stride must be ≥ 1".into()));
        }
        Ok(MaxPool2d { window, stride, cache: None })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn output_hw(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        if self.window > h || self.window > w {
            return Err(Error::Config(format!("pool window {p}×{p} larger than input {h}×{w}", p = self.window)));
        }
        Ok(((h - self.window) / self.stride + 1, (w - self.window) / self.stride + 1))
    }

    fn run<T: Scalar>(&self, x: &Tensor<T>) -> Result<(Tensor<T>, Vec<usize>)> {
        let (n, h, w, c) = x.dims4()?;
        let (oh, ow) = self.output_hw(h, w)?;
        let xd = x.data();
        let mut out = Vec::with_capacity(n * oh * ow * c);
        let mut arg = Vec::with_capacity(out.capacity());
        for s in 0..n {
            for i in 0..oh {
                for j in 0..ow {
                    for d in 0..c {
                        let mut best_idx = usize::MAX;
                        let mut best = T::neg_infinity();
                        for m in 0..self.window {
                            for q in 0..self.window {
                                let idx = ((s * h + i * self.stride + m) * w + j * self.stride + q) * c + d;
                                if best_idx == usize::MAX || xd[idx] > best {
                                    best = xd[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                        out.push(best);
                        arg.push(best_idx);
                    }
                }
            }
        }
        Ok((Tensor::new(vec![n, oh, ow, c], out)?, arg))
    }

    pub fn infer<T: Scalar>(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.run(x)?.0)
    }

    pub fn forward<T: Scalar>(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (y, arg) = self.run(x)?;
        self.cache = Some((arg, x.shape().to_vec()));
        Ok(y)
    }

    /// Routes each incoming gradient to the argmax position of its window.
    pub fn backward<T: Scalar>(&mut self, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        let (arg, shape) =
            self.cache.take().ok_or_else(|| Error::Usage("maxpool backward called without a forward cache".into()))?;
        if grad_out.len() != arg.len() {
            return Err(Error::Config(format!(
                "maxpool grad_out has {} values, forward produced {}",
                grad_out.len(),
                arg.len()
            )));
        }
        let mut g = Tensor::zeros(&shape);
        let gd = g.data_mut();
        for (&idx, &v) in arg.iter().zip(grad_out.data()) {
            gd[idx] = gd[idx] + v;
        }
        Ok(g)
    }
}

/// Global average pooling: `[n, h, w, c] → [n, c]`, each channel reduced to
/// its spatial mean.
#[derive(Clone, Debug, Default)]
pub struct GlobalAvgPool {
    cache: Option<Vec<usize>>,
}

impl GlobalAvgPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn infer<T: Scalar>(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (n, h, w, c) = x.dims4()?;
        let scale = T::lit(1.0 / (h * w) as f64);
        let mut out = vec![T::zero(); n * c];
        for s in 0..n {
            let acc = &mut out[s * c..(s + 1) * c];
            for px in x.data()[s * h * w * c..(s + 1) * h * w * c].chunks(c) {
                for (a, v) in acc.iter_mut().zip(px) {
                    *a = *a + *v;
                }
            }
            acc.iter_mut().for_each(|a| *a = *a * scale);
        }
        Tensor::new(vec![n, c], out)
    }

    pub fn forward<T: Scalar>(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let y = self.infer(x)?;
        self.cache = Some(x.shape().to_vec());
        Ok(y)
    }

    pub fn backward<T: Scalar>(&mut self, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        let shape =
            self.cache.take().ok_or_else(|| Error::Usage("GAP backward called without a forward cache".into()))?;
        let (n, h, w, c) = (shape[0], shape[1], shape[2], shape[3]);
        if grad_out.shape() != [n, c] {
            return Err(Error::Config(format!("GAP grad_out shape {:?}, expected {:?}", grad_out.shape(), [n, c])));
        }
        let scale = T::lit(1.0 / (h * w) as f64);
        let mut g = Vec::with_capacity(n * h * w * c);
        for s in 0..n {
            let row = &grad_out.data()[s * c..(s + 1) * c];
            for _ in 0..h * w {
                g.extend(row.iter().map(|&v| v * scale));
            }
        }
        Tensor::new(shape, g)
    }
}
