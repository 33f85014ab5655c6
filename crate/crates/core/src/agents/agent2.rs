use std::path::Path;

use super::train::{fit, Objective, TrainConfig, TrainReport};
use crate::nn::{checkpoint, Dense, Dropout, Init, Layer, Relu, Scalar, Sequential, Standardize, Tensor};
use crate::rng::Rng;
use crate::semantic::FEATURE_WIDTH;
use crate::{Error, Result};

pub const AGENT2_WIDTHS: [usize; 5] = [FEATURE_WIDTH, 128, 64, 32, 1];
pub const AGENT2_DROPOUT: f64 = 0.2;

/// Standardize → (Dense → ReLU → Dropout) × 2 → Dense → ReLU → Dense logit.
///
/// `widths` lists input, three hidden widths and the output width.
pub fn agent2_network<T: Scalar>(widths: &[usize; 5], dropout: f64, rng: &mut Rng) -> Result<Sequential<T>> {
    let [w0, w1, w2, w3, w4] = *widths;
    Sequential::new(
        vec![w0],
        vec![
            Layer::Standardize(Standardize::identity(w0)),
            Layer::Dense(Dense::new(w0, w1, Init::HeUniform, rng)),
            Layer::Relu(Relu::new()),
            Layer::Dropout(Dropout::new(dropout)?),
            Layer::Dense(Dense::new(w1, w2, Init::HeUniform, rng)),
            Layer::Relu(Relu::new()),
            Layer::Dropout(Dropout::new(dropout)?),
            Layer::Dense(Dense::new(w2, w3, Init::HeUniform, rng)),
            Layer::Relu(Relu::new()),
            Layer::Dense(Dense::new(w3, w4, Init::XavierUniform, rng)),
        ],
    )
}

/// Multimodal consistency classifier over the 14-dimensional feature.
#[derive(Clone, Debug)]
pub struct Agent2<T> {
    pub net: Sequential<T>,
}

impl<T: Scalar> Agent2<T> {
    pub fn build(seed: u64) -> Result<Self> {
        let net = agent2_network(&AGENT2_WIDTHS, AGENT2_DROPOUT, &mut Rng::new(seed))?;
        Ok(Agent2 { net })
    }

    pub fn from_network(net: Sequential<T>) -> Result<Self> {
        let out = net.output_shape()?;
        if net.input_shape() != [FEATURE_WIDTH] || out != [1] {
            return Err(Error::Usage(format!(
                "network {:?} -> {out:?} is not a consistency classifier",
                net.input_shape()
            )));
        }
        Ok(Agent2 { net })
    }

    /// Fits the input standardizer on `x`, then trains.
    pub fn train(
        &mut self,
        x: &Tensor<T>,
        y: &[u8],
        val: Option<(&Tensor<T>, &[u8])>,
        cfg: &TrainConfig,
    ) -> Result<TrainReport> {
        let std = Standardize::fit(x)?;
        match self.net.layers_mut().first_mut() {
            Some(Layer::Standardize(s)) => *s = std,
            _ => return Err(Error::Usage("agent-2 network must start with a standardize layer".into())),
        }
        fit(&mut self.net, Objective::Sigmoid, x, y, val, cfg, None)
    }

    /// Probability per row of an `[n, 14]` batch.
    pub fn predict_batch(&self, x: &Tensor<T>) -> Result<Vec<f64>> {
        Objective::Sigmoid.probabilities(&self.net.infer(x)?)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let t = Tensor::from_f64(vec![1, x.len()], x)?;
        Ok(self.predict_batch(&t)?[0])
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        checkpoint::save(&self.net, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Agent2::from_network(checkpoint::load(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count_matches_widths() {
        let mut a = Agent2::<f64>::build(42).unwrap();
        let by_width: usize = AGENT2_WIDTHS.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        assert_eq!(by_width, 14 * 128 + 128 + 128 * 64 + 64 + 64 * 32 + 32 + 32 + 1);
        assert_eq!(a.net.parameter_count(), by_width);
        assert_eq!(by_width, 12_289);
    }

    #[test]
    fn output_is_a_probability() {
        let a = Agent2::<f64>::build(1).unwrap();
        let p = a.predict(&[0.0; 14]).unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert_eq!(p, a.predict(&[0.0; 14]).unwrap());
        assert!(matches!(a.predict(&[0.0; 13]), Err(Error::Usage(_))));
    }

    #[test]
    fn separable_similarity_is_learned() {
        let mut rng = Rng::new(5);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..120 {
            let label = (i % 2) as u8;
            let mut x: Vec<f64> = (0..13).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
            x.push(if label == 1 { rng.uniform_range(0.0, 0.1) } else { rng.uniform_range(0.9, 1.0) });
            rows.extend(x);
            y.push(label);
        }
        let x = Tensor::<f64>::from_f64(vec![120, 14], &rows).unwrap();
        let idx_t: Vec<usize> = (0..90).collect();
        let idx_v: Vec<usize> = (90..120).collect();
        let (xt, xv) = (x.gather(&idx_t).unwrap(), x.gather(&idx_v).unwrap());
        let mut a = Agent2::<f64>::build(42).unwrap();
        let report = a.train(&xt, &y[..90], Some((&xv, &y[90..])), &TrainConfig::agent2()).unwrap();
        let best = report.history[report.best_epoch - 1].val_acc.unwrap();
        assert!(best >= 0.95, "best val acc {best}");
    }
}
