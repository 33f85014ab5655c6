use super::{init_uniform, Init, Scalar, Tensor};
use crate::par::{self, Exec};
use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Padding {
    Valid,
    /// Output size `ceil(in / stride)`; odd padding puts the extra row/column
    /// at the bottom/right.
    Same,
}

/// 2-D convolution over NHWC batches with a `[k, k, d_in, d_out]` kernel.
///
/// `O[i,j,d] = Σ_m Σ_n Σ_c I[i·s+m, j·s+n, c] · K[m,n,c,d] + b[d]`
#[derive(Clone, Debug)]
pub struct Conv2d<T> {
    pub(crate) kernel: Tensor<T>,
    pub(crate) bias: Tensor<T>,
    pub(crate) grad_kernel: Tensor<T>,
    pub(crate) grad_bias: Tensor<T>,
    stride: usize,
    padding: Padding,
    cache: Option<Tensor<T>>,
}

struct Geometry {
    h: usize,
    w: usize,
    oh: usize,
    ow: usize,
    pad_top: usize,
    pad_left: usize,
}

impl<T: Scalar> Conv2d<T> {
    pub fn new(
        k: usize,
        d_in: usize,
        d_out: usize,
        stride: usize,
        padding: Padding,
        init: Init,
        rng: &mut Rng,
    ) -> Result<Self> {
        let fan_in = k * k * d_in;
        let fan_out = k * k * d_out;
        let kernel = init_uniform(&[k, k, d_in, d_out], init, fan_in, fan_out, rng);
        Self::from_parts(kernel, Tensor::zeros(&[d_out]), stride, padding)
    }

    pub fn from_parts(kernel: Tensor<T>, bias: Tensor<T>, stride: usize, padding: Padding) -> Result<Self> {
        let s = kernel.shape();
        if s.len() != 4 || s[0] != s[1] {
            return Err(Error::Config(format!("conv kernel must be k×k×d_in×d_out, got {s:?}")));
        }
        if bias.shape() != [s[3]] {
            return Err(Error::Config(format!("conv bias must have {} entries, got shape {:?}", s[3], bias.shape())));
        }
        if stride == 0 {
            return Err(Error::Config("conv stride must be ≥ 1".into()));
        }
        Ok(Conv2d {
            grad_kernel: Tensor::zeros(kernel.shape()),
            grad_bias: Tensor::zeros(bias.shape()),
            kernel,
            bias,
            stride,
            padding,
            cache: None,
        })
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel.shape()[0]
    }
    pub fn in_channels(&self) -> usize {
        self.kernel.shape()[2]
    }
    pub fn out_channels(&self) -> usize {
        self.kernel.shape()[3]
    }
    pub fn stride(&self) -> usize {
        self.stride
    }
    pub fn padding(&self) -> Padding {
        self.padding
    }
    pub fn kernel(&self) -> &Tensor<T> {
        &self.kernel
    }
    pub fn bias(&self) -> &Tensor<T> {
        &self.bias
    }

    /// Spatial output size for an `h × w` input.
    pub fn output_hw(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        let g = self.geometry(h, w)?;
        Ok((g.oh, g.ow))
    }

    fn geometry(&self, h: usize, w: usize) -> Result<Geometry> {
        let k = self.kernel_size();
        let s = self.stride;
        match self.padding {
            Padding::Valid => {
                if h < k || w < k {
                    return Err(Error::Config(format!("valid convolution needs input ≥ {k}×{k}, got {h}×{w}")));
                }
                Ok(Geometry { h, w, oh: (h - k) / s + 1, ow: (w - k) / s + 1, pad_top: 0, pad_left: 0 })
            }
            Padding::Same => {
                let oh = h.div_ceil(s);
                let ow = w.div_ceil(s);
                let pad_h = ((oh - 1) * s + k).saturating_sub(h);
                let pad_w = ((ow - 1) * s + k).saturating_sub(w);
                Ok(Geometry { h, w, oh, ow, pad_top: pad_h / 2, pad_left: pad_w / 2 })
            }
        }
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<(usize, Geometry)> {
        let (n, h, w, c) = x.dims4()?;
        if c != self.in_channels() {
            return Err(Error::Config(format!(
                "conv expects {} input channels, got {c} (input shape {:?})",
                self.in_channels(),
                x.shape()
            )));
        }
        Ok((n, self.geometry(h, w)?))
    }

    /// Writes the `[oh·ow, k·k·d_in]` patch matrix of one sample.
    fn im2col(&self, input: &[T], g: &Geometry, patches: &mut [T]) {
        let k = self.kernel_size();
        let din = self.in_channels();
        let cols = k * k * din;
        for oi in 0..g.oh {
            for oj in 0..g.ow {
                let row = &mut patches[(oi * g.ow + oj) * cols..][..cols];
                for m in 0..k {
                    let ii = (oi * self.stride + m) as isize - g.pad_top as isize;
                    for n in 0..k {
                        let jj = (oj * self.stride + n) as isize - g.pad_left as isize;
                        let dst = &mut row[(m * k + n) * din..][..din];
                        if ii < 0 || jj < 0 || ii as usize >= g.h || jj as usize >= g.w {
                            dst.fill(T::zero());
                        } else {
                            let src = (ii as usize * g.w + jj as usize) * din;
                            dst.copy_from_slice(&input[src..src + din]);
                        }
                    }
                }
            }
        }
    }

    /// Scatter-adds a patch-gradient matrix back onto one input sample.
    fn col2im(&self, grad_patches: &[T], g: &Geometry, grad_input: &mut [T]) {
        let k = self.kernel_size();
        let din = self.in_channels();
        let cols = k * k * din;
        grad_input.fill(T::zero());
        for oi in 0..g.oh {
            for oj in 0..g.ow {
                let row = &grad_patches[(oi * g.ow + oj) * cols..][..cols];
                for m in 0..k {
                    let ii = (oi * self.stride + m) as isize - g.pad_top as isize;
                    if ii < 0 || ii as usize >= g.h {
                        continue;
                    }
                    for n in 0..k {
                        let jj = (oj * self.stride + n) as isize - g.pad_left as isize;
                        if jj < 0 || jj as usize >= g.w {
                            continue;
                        }
                        let dst = (ii as usize * g.w + jj as usize) * din;
                        let src = &row[(m * k + n) * din..][..din];
                        for (d, s) in grad_input[dst..dst + din].iter_mut().zip(src) {
                            *d = *d + *s;
                        }
                    }
                }
            }
        }
    }

    /// Forward pass without caching; safe to share across threads.
    pub fn infer(&self, x: &Tensor<T>, exec: Exec) -> Result<Tensor<T>> {
        let (n, g) = self.check_input(x)?;
        let dout = self.out_channels();
        let cols = self.kernel_size().pow(2) * self.in_channels();
        let positions = g.oh * g.ow;
        let per_in = g.h * g.w * self.in_channels();
        let mut out = vec![T::zero(); n * positions * dout];
        par::for_each_chunk_mut(exec, &mut out, positions * dout, |s, chunk| {
            let mut patches = vec![T::zero(); positions * cols];
            self.im2col(&x.data()[s * per_in..][..per_in], &g, &mut patches);
            T::gemm(positions, cols, dout, &patches, false, self.kernel.data(), false, chunk, false);
            for row in chunk.chunks_mut(dout) {
                for (v, b) in row.iter_mut().zip(self.bias.data()) {
                    *v = *v + *b;
                }
            }
        });
        Tensor::new(vec![n, g.oh, g.ow, dout], out)
    }

    pub fn forward(&mut self, x: &Tensor<T>, exec: Exec) -> Result<Tensor<T>> {
        let y = self.infer(x, exec)?;
        self.cache = Some(x.clone());
        Ok(y)
    }

    /// Returns the input gradient and stores kernel/bias gradients.
    pub fn backward(&mut self, grad_out: &Tensor<T>, exec: Exec) -> Result<Tensor<T>> {
        let x = self.cache.take().ok_or_else(|| Error::Usage("conv backward called without a forward cache".into()))?;
        let (n, g) = self.check_input(&x)?;
        let dout = self.out_channels();
        if grad_out.shape() != [n, g.oh, g.ow, dout] {
            return Err(Error::Config(format!(
                "conv grad_out shape {:?} does not match forward output {:?}",
                grad_out.shape(),
                [n, g.oh, g.ow, dout]
            )));
        }
        let cols = self.kernel_size().pow(2) * self.in_channels();
        let positions = g.oh * g.ow;
        let per_in = g.h * g.w * self.in_channels();
        let per_out = positions * dout;

        let mut gb = vec![T::zero(); dout];
        for row in grad_out.data().chunks(dout) {
            for (acc, v) in gb.iter_mut().zip(row) {
                *acc = *acc + *v;
            }
        }
        let mut gk = vec![T::zero(); cols * dout];
        let mut patches = vec![T::zero(); positions * cols];
        for s in 0..n {
            self.im2col(&x.data()[s * per_in..][..per_in], &g, &mut patches);
            T::gemm(
                cols,
                positions,
                dout,
                &patches,
                true,
                &grad_out.data()[s * per_out..][..per_out],
                false,
                &mut gk,
                true,
            );
        }

        let mut grad_in = vec![T::zero(); n * per_in];
        par::for_each_chunk_mut(exec, &mut grad_in, per_in, |s, chunk| {
            let mut gp = vec![T::zero(); positions * cols];
            T::gemm(
                positions,
                dout,
                cols,
                &grad_out.data()[s * per_out..][..per_out],
                false,
                self.kernel.data(),
                true,
                &mut gp,
                false,
            );
            self.col2im(&gp, &g, chunk);
        });

        self.grad_kernel = Tensor::new(self.kernel.shape().to_vec(), gk)?;
        self.grad_bias = Tensor::new(vec![dout], gb)?;
        Tensor::new(x.shape().to_vec(), grad_in)
    }
}
