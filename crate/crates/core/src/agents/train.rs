use serde::{Deserialize, Serialize};

use crate::nn::loss::{sigmoid_cross_entropy, softmax_cross_entropy};
use crate::nn::{Adam, Mode, Scalar, Sequential, Tensor};
use crate::rng::Rng;
use crate::{Error, Result};

/// Output head convention of a network under training.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Two logits, softmax + categorical cross-entropy; class 1 is fake.
    Softmax2,
    /// One logit, sigmoid + binary cross-entropy.
    Sigmoid,
}

impl Objective {
    fn loss<T: Scalar>(self, logits: &Tensor<T>, labels: &[u8]) -> Result<(f64, Tensor<T>)> {
        match self {
            Objective::Softmax2 => {
                let idx: Vec<usize> = labels.iter().map(|&y| y as usize).collect();
                softmax_cross_entropy(logits, &idx)
            }
            Objective::Sigmoid => sigmoid_cross_entropy(logits, labels),
        }
    }

    /// Fake-class probability per row.
    pub fn probabilities<T: Scalar>(self, logits: &Tensor<T>) -> Result<Vec<f64>> {
        let (n, c) = logits.dims2()?;
        let z = logits.data();
        Ok(match self {
            Objective::Softmax2 => (0..n).map(|i| crate::nn::softmax(&z[i * c..(i + 1) * c])[1].as_f64()).collect(),
            Objective::Sigmoid => z.iter().map(|&v| crate::nn::sigmoid(v).as_f64()).collect(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrReduction {
    pub factor: f64,
    pub patience: usize,
    pub min_lr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Stop after this many epochs without a validation-accuracy improvement.
    pub early_stopping: Option<usize>,
    pub lr_reduction: Option<LrReduction>,
    /// Reload the weights of the best validation epoch when training ends.
    pub restore_best: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::agent1()
    }
}

impl TrainConfig {
    pub fn agent1() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            epochs: 50,
            batch_size: 16,
            early_stopping: None,
            lr_reduction: None,
            restore_best: false,
            seed: 42,
        }
    }

    pub fn agent2() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 100,
            early_stopping: Some(10),
            lr_reduction: Some(LrReduction { factor: 0.5, patience: 5, min_lr: 0.0 }),
            restore_best: true,
            ..TrainConfig::agent1()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: Option<f64>,
    pub val_acc: Option<f64>,
    pub lr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Patience counter on a maximized metric; improvement must be strict.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    pub patience: usize,
    best: f64,
    wait: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping { patience, best: f64::NEG_INFINITY, wait: 0 }
    }

    /// Records one epoch's metric; returns true when training should stop.
    pub fn observe(&mut self, metric: f64) -> bool {
        if metric > self.best {
            self.best = metric;
            self.wait = 0;
        } else {
            self.wait += 1;
        }
        self.wait >= self.patience
    }
}

/// Multiplies the learning rate by `factor` after `patience` stagnant epochs.
#[derive(Clone, Debug)]
pub struct Plateau {
    pub cfg: LrReduction,
    best: f64,
    wait: usize,
}

impl Plateau {
    pub fn new(cfg: LrReduction) -> Self {
        Plateau { cfg, best: f64::NEG_INFINITY, wait: 0 }
    }

    /// Returns the learning rate to use for the next epoch.
    pub fn observe(&mut self, metric: f64, lr: f64) -> f64 {
        if metric > self.best {
            self.best = metric;
            self.wait = 0;
            return lr;
        }
        self.wait += 1;
        if self.wait >= self.cfg.patience {
            self.wait = 0;
            return (lr * self.cfg.factor).max(self.cfg.min_lr);
        }
        lr
    }
}

/// Splits a shuffled order into batches; a trailing batch of one sample is
/// folded into its predecessor because batch normalization needs two.
pub fn batches(order: &[usize], size: usize) -> Vec<&[usize]> {
    let size = size.max(1);
    let mut out: Vec<&[usize]> = order.chunks(size).collect();
    if out.len() > 1 && out.last().is_some_and(|b| b.len() == 1) {
        out.pop();
        let start = (out.len() - 1) * size;
        *out.last_mut().expect("nonempty") = &order[start..];
    }
    out
}

/// Loss and accuracy in inference mode, evaluated in chunks.
pub fn evaluate<T: Scalar>(net: &Sequential<T>, objective: Objective, x: &Tensor<T>, y: &[u8]) -> Result<(f64, f64)> {
    let n = x.batch();
    let mut loss = 0.0;
    let mut correct = 0usize;
    for start in (0..n).step_by(64) {
        let idx: Vec<usize> = (start..(start + 64).min(n)).collect();
        let logits = net.infer(&x.gather(&idx)?)?;
        let labels: Vec<u8> = idx.iter().map(|&i| y[i]).collect();
        let (l, _) = objective.loss(&logits, &labels)?;
        loss += l * idx.len() as f64;
        let probs = objective.probabilities(&logits)?;
        correct += probs.iter().zip(&labels).filter(|(&p, &t)| u8::from(p >= 0.5) == t).count();
    }
    Ok((loss / n as f64, correct as f64 / n as f64))
}

pub type BatchHook<'a, T> = dyn Fn(Tensor<T>, &mut Rng) -> Result<Tensor<T>> + 'a;

/// Mini-batch Adam training with per-epoch shuffling.
///
/// `augment` transforms each training batch before the forward pass.
/// Monitoring uses validation accuracy when a validation set is given and
/// training accuracy otherwise.
pub fn fit<T: Scalar>(
    net: &mut Sequential<T>,
    objective: Objective,
    x: &Tensor<T>,
    y: &[u8],
    val: Option<(&Tensor<T>, &[u8])>,
    cfg: &TrainConfig,
    augment: Option<&BatchHook<'_, T>>,
) -> Result<TrainReport> {
    let n = x.batch();
    if y.len() != n || n == 0 {
        return Err(Error::Usage(format!("{n} training inputs with {} labels", y.len())));
    }
    let ones = y.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == n {
        return Err(Error::Usage("training labels contain a single class".into()));
    }
    if n < 2 {
        return Err(Error::Usage("training needs at least two samples".into()));
    }
    let val = val.filter(|(vx, _)| vx.batch() > 0);
    let mut adam = Adam::<T>::new(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    let mut shuffle_rng = Rng::derive(cfg.seed, 1);
    let mut dropout_rng = Rng::derive(cfg.seed, 2);
    let mut augment_rng = Rng::derive(cfg.seed, 3);
    let mut stopper = cfg.early_stopping.map(EarlyStopping::new);
    let mut plateau = cfg.lr_reduction.map(Plateau::new);
    let mut best: Option<(f64, usize)> = None;
    let mut best_net: Option<Sequential<T>> = None;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut stopped_early = false;
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 1..=cfg.epochs {
        let lr = adam.learning_rate;
        shuffle_rng.shuffle(&mut order);
        for batch in batches(&order, cfg.batch_size) {
            let mut xb = x.gather(batch)?;
            if let Some(hook) = augment {
                xb = hook(xb, &mut augment_rng)?;
            }
            let yb: Vec<u8> = batch.iter().map(|&i| y[i]).collect();
            let logits = net.forward(&xb, Mode::Train, &mut dropout_rng)?;
            let (loss, grad) = objective.loss(&logits, &yb)?;
            if !loss.is_finite() {
                return Err(Error::Training(format!("loss became {loss} in epoch {epoch}")));
            }
            net.backward(&grad)?;
            adam.step(net.params())?;
        }
        let (train_loss, train_acc) = evaluate(net, objective, x, y)?;
        let (val_loss, val_acc) = match val {
            Some((vx, vy)) => {
                let (l, a) = evaluate(net, objective, vx, vy)?;
                (Some(l), Some(a))
            }
            None => (None, None),
        };
        history.push(EpochRecord { epoch, train_loss, train_acc, val_loss, val_acc, lr });
        let monitored = val_acc.unwrap_or(train_acc);
        if best.is_none_or(|(b, _)| monitored > b) {
            best = Some((monitored, epoch));
            if cfg.restore_best {
                best_net = Some(net.clone());
            }
        }
        if let Some(p) = plateau.as_mut() {
            adam.learning_rate = p.observe(monitored, adam.learning_rate);
        }
        if let Some(s) = stopper.as_mut() {
            if s.observe(monitored) && epoch < cfg.epochs {
                stopped_early = true;
                break;
            }
        }
    }
    if let Some(snapshot) = best_net {
        *net = snapshot;
    }
    Ok(TrainReport { history, best_epoch: best.map_or(0, |b| b.1), stopped_early })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strictly_improving_metric_never_stops() {
        let mut s = EarlyStopping::new(10);
        assert!((0..100).all(|e| !s.observe(e as f64)));
    }

    #[test]
    fn stagnation_stops_after_patience() {
        let mut s = EarlyStopping::new(3);
        assert!(!s.observe(0.5));
        assert!(!s.observe(0.5));
        assert!(!s.observe(0.4));
        assert!(s.observe(0.5));
    }

    #[test]
    fn two_reductions_quarter_the_rate() {
        let mut p = Plateau::new(LrReduction { factor: 0.5, patience: 5, min_lr: 0.0 });
        let mut lr = 1e-3;
        lr = p.observe(0.9, lr);
        for _ in 0..10 {
            lr = p.observe(0.8, lr);
        }
        assert!((lr - 0.25e-3).abs() < 1e-18);
    }

    #[test]
    fn trailing_single_sample_is_merged() {
        let order: Vec<usize> = (0..33).collect();
        let b = batches(&order, 16);
        assert_eq!(b.iter().map(|b| b.len()).collect::<Vec<_>>(), vec![16, 17]);
        assert_eq!(batches(&order[..32], 16).len(), 2);
        assert_eq!(batches(&order[..1], 16).len(), 1);
    }
}
