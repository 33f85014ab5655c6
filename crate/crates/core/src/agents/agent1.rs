use std::path::Path;

use super::train::{fit, BatchHook, Objective, TrainConfig, TrainReport};
use crate::nn::{
    checkpoint, BatchNorm, Conv2d, Dense, Dropout, GlobalAvgPool, Init, Layer, MaxPool2d, Padding, Relu, Scalar,
    Sequential, Tensor,
};
use crate::rng::Rng;
use crate::vision::{augment, AugmentPolicy, Frame};
use crate::{Error, Result};

/// Index of the fake class in the softmax head.
pub const FAKE_CLASS: usize = 1;
/// Reduced input side used for desk-scale training.
pub const DESK_INPUT: usize = 64;

/// `(filters, kernel, stride, padding, pooled)` for the five conv blocks.
const BLOCKS: [(usize, usize, usize, Padding, bool); 5] = [
    (64, 11, 4, Padding::Valid, true),
    (128, 5, 1, Padding::Same, true),
    (256, 3, 1, Padding::Same, false),
    (256, 3, 1, Padding::Same, false),
    (128, 3, 1, Padding::Same, true),
];

/// Frame-level CNN scoring each frame's fake probability.
#[derive(Clone, Debug)]
pub struct Agent1<T> {
    pub net: Sequential<T>,
}

impl<T: Scalar> Agent1<T> {
    /// Builds the conv stack for square `input`×`input`×3 frames. A 3×3 pool
    /// whose window exceeds the current feature map is left out.
    pub fn build(seed: u64, input: usize) -> Result<Self> {
        let mut rng = Rng::new(seed);
        let mut layers = Vec::new();
        let mut side = input;
        let mut depth = 3;
        for (filters, k, stride, padding, pooled) in BLOCKS {
            let conv = Conv2d::new(k, depth, filters, stride, padding, Init::HeUniform, &mut rng)?;
            side = conv.output_hw(side, side)?.0;
            layers.push(Layer::Conv2d(conv));
            layers.push(Layer::Relu(Relu::new()));
            layers.push(Layer::BatchNorm(BatchNorm::new(filters)));
            if pooled && side >= 3 {
                let pool = MaxPool2d::new(3, 2)?;
                side = pool.output_hw(side, side)?.0;
                layers.push(Layer::MaxPool2d(pool));
            }
            depth = filters;
        }
        layers.extend([
            Layer::GlobalAvgPool(GlobalAvgPool::new()),
            Layer::Dense(Dense::new(depth, 1024, Init::HeUniform, &mut rng)),
            Layer::Relu(Relu::new()),
            Layer::Dropout(Dropout::new(0.5)?),
            Layer::BatchNorm(BatchNorm::new(1024)),
            Layer::Dense(Dense::new(1024, 512, Init::HeUniform, &mut rng)),
            Layer::Relu(Relu::new()),
            Layer::Dropout(Dropout::new(0.5)?),
            Layer::Dense(Dense::new(512, 2, Init::XavierUniform, &mut rng)),
        ]);
        Ok(Agent1 { net: Sequential::new(vec![input, input, 3], layers)? })
    }

    pub fn from_network(net: Sequential<T>) -> Result<Self> {
        let out = net.output_shape()?;
        if net.input_shape().len() != 3 || out != [2] {
            return Err(Error::Usage(format!("network {:?} -> {out:?} is not a frame classifier", net.input_shape())));
        }
        Ok(Agent1 { net })
    }

    pub fn input_size(&self) -> usize {
        self.net.input_shape()[0]
    }

    /// Input shape followed by the output shape of every reshaping layer.
    pub fn shape_audit(&self) -> Result<Vec<Vec<usize>>> {
        let mut chain = vec![self.net.input_shape().to_vec()];
        chain.extend(self.net.shape_trace()?.into_iter().filter(|(kind, _)| kind.reshapes()).map(|(_, s)| s));
        Ok(chain)
    }

    /// `[p(real), p(fake)]` per frame of a `[n, h, w, 3]` batch.
    pub fn predict_proba(&self, frames: &Tensor<T>) -> Result<Vec<[f64; 2]>> {
        let n = frames.batch();
        let mut out = Vec::with_capacity(n);
        for start in (0..n).step_by(32) {
            let idx: Vec<usize> = (start..(start + 32).min(n)).collect();
            let logits = self.net.infer(&frames.gather(&idx)?)?;
            for row in logits.data().chunks(2) {
                let p = crate::nn::softmax(row);
                out.push([p[0].as_f64(), p[1].as_f64()]);
            }
        }
        Ok(out)
    }

    /// Fake-class probability per frame.
    pub fn predict_frames(&self, frames: &Tensor<T>) -> Result<Vec<f64>> {
        Ok(self.predict_proba(frames)?.into_iter().map(|p| p[FAKE_CLASS]).collect())
    }

    /// Fake-class probability of one preprocessed `[h, w, 3]` frame.
    pub fn predict_frame(&self, frame: &Tensor<T>) -> Result<f64> {
        let mut shape = vec![1];
        shape.extend_from_slice(frame.shape());
        Ok(self.predict_frames(&frame.clone().reshape(shape)?)?[0])
    }

    /// Trains on `[n, h, w, 3]` frames with per-frame labels.
    pub fn train(
        &mut self,
        x: &Tensor<T>,
        y: &[u8],
        val: Option<(&Tensor<T>, &[u8])>,
        cfg: &TrainConfig,
        policy: Option<AugmentPolicy>,
    ) -> Result<TrainReport> {
        let hook = policy.map(|p| {
            move |batch: Tensor<T>, rng: &mut Rng| -> Result<Tensor<T>> {
                let frame_shape = batch.shape()[1..].to_vec();
                let frames = (0..batch.batch())
                    .map(|i| {
                        let f = Frame::from_tensor(&batch.sample(i).reshape(frame_shape.clone())?)?;
                        Ok(augment(&f, &p, rng).to_tensor())
                    })
                    .collect::<Result<Vec<_>>>()?;
                Tensor::stack(&frames)
            }
        });
        let hook_ref: Option<&BatchHook<'_, T>> = hook.as_ref().map(|h| h as &BatchHook<'_, T>);
        fit(&mut self.net, Objective::Softmax2, x, y, val, cfg, hook_ref)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        checkpoint::save(&self.net, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Agent1::from_network(checkpoint::load(path)?)
    }
}
