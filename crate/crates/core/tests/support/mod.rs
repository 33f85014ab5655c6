//! Independent reference implementations shared by the integration and
//! acceptance suites.

#![allow(dead_code)]

use deepagent::agents::agent2_network;
use deepagent::fusion::Fold;
use deepagent::nn::gradcheck::{gradient_check, GradCheckReport, DEFAULT_STEP};
use deepagent::nn::loss::{sigmoid_cross_entropy, softmax_cross_entropy};
use deepagent::nn::{
    BatchNorm, Conv2d, Dense, Dropout, GlobalAvgPool, Init, Layer, MaxPool2d, Mode, Padding, Relu, Sequential,
    Standardize, Tensor,
};
use deepagent::rng::Rng;
use deepagent::Result;

pub fn random_tensor(shape: &[usize], rng: &mut Rng) -> Tensor<f64> {
    Tensor::from_fn(shape, |_| rng.uniform_range(-1.0, 1.0))
}

pub struct GradCase {
    pub name: &'static str,
    pub report: GradCheckReport,
}

/// Moves biases off zero so no ReLU input sits exactly on the kink.
fn jitter_biases(net: &mut Sequential<f64>, seed: u64) {
    let mut rng = Rng::new(seed);
    for p in net.params() {
        if p.name.ends_with("bias") {
            p.value.data_mut().iter_mut().for_each(|b| *b = rng.uniform_range(0.05, 0.25));
        }
    }
}

fn check_softmax(name: &'static str, net: &mut Sequential<f64>, x: &Tensor<f64>, mode: Mode) -> Result<GradCase> {
    jitter_biases(net, 3);
    let labels: Vec<usize> = (0..x.batch()).map(|i| i % 2).collect();
    let loss = |out: &Tensor<f64>| softmax_cross_entropy(out, &labels);
    let report = gradient_check(net, x, &loss, mode, 7, DEFAULT_STEP)?;
    Ok(GradCase { name, report })
}

/// Finite-difference checks for every layer type and both agent heads.
pub fn gradient_suite() -> Result<Vec<GradCase>> {
    let mut rng = Rng::new(2024);
    let r = &mut rng;
    let he = Init::HeUniform;
    let mut cases = Vec::new();

    let x = random_tensor(&[4, 5], r);
    let mut net = Sequential::new(vec![5], vec![Layer::Dense(Dense::new(5, 3, he, r))])?;
    cases.push(check_softmax("dense", &mut net, &x, Mode::Train)?);

    let mut net = Sequential::new(
        vec![5],
        vec![Layer::Dense(Dense::new(5, 6, he, r)), Layer::Relu(Relu::new()), Layer::Dense(Dense::new(6, 3, he, r))],
    )?;
    cases.push(check_softmax("relu", &mut net, &x, Mode::Train)?);

    let mut net = Sequential::new(
        vec![5],
        vec![
            Layer::Dense(Dense::new(5, 6, he, r)),
            Layer::Relu(Relu::new()),
            Layer::Dropout(Dropout::new(0.5)?),
            Layer::Dense(Dense::new(6, 3, he, r)),
        ],
    )?;
    cases.push(check_softmax("dropout", &mut net, &x, Mode::Train)?);

    let x6 = random_tensor(&[6, 5], r);
    let mut net = Sequential::new(
        vec![5],
        vec![
            Layer::Dense(Dense::new(5, 6, he, r)),
            Layer::Relu(Relu::new()),
            Layer::BatchNorm(BatchNorm::new(6)),
            Layer::Dense(Dense::new(6, 3, he, r)),
        ],
    )?;
    cases.push(check_softmax("batchnorm", &mut net, &x6, Mode::Train)?);

    let mut net = Sequential::new(
        vec![5],
        vec![Layer::Standardize(Standardize::fit(&x6)?), Layer::Dense(Dense::new(5, 3, he, r))],
    )?;
    cases.push(check_softmax("standardize", &mut net, &x6, Mode::Train)?);

    let xi = random_tensor(&[3, 7, 7, 2], r);
    let mut net = Sequential::new(
        vec![7, 7, 2],
        vec![
            Layer::Conv2d(Conv2d::new(3, 2, 3, 2, Padding::Valid, he, r)?),
            Layer::GlobalAvgPool(GlobalAvgPool::new()),
            Layer::Dense(Dense::new(3, 2, he, r)),
        ],
    )?;
    cases.push(check_softmax("conv_valid_stride2", &mut net, &xi, Mode::Train)?);

    let mut net = Sequential::new(
        vec![7, 7, 2],
        vec![
            Layer::Conv2d(Conv2d::new(3, 2, 3, 2, Padding::Same, he, r)?),
            Layer::GlobalAvgPool(GlobalAvgPool::new()),
            Layer::Dense(Dense::new(3, 2, he, r)),
        ],
    )?;
    cases.push(check_softmax("conv_same_stride2", &mut net, &xi, Mode::Train)?);

    let mut net = Sequential::new(
        vec![7, 7, 2],
        vec![
            Layer::Conv2d(Conv2d::new(2, 2, 3, 1, Padding::Valid, he, r)?),
            Layer::MaxPool2d(MaxPool2d::new(3, 2)?),
            Layer::GlobalAvgPool(GlobalAvgPool::new()),
            Layer::Dense(Dense::new(3, 2, he, r)),
        ],
    )?;
    cases.push(check_softmax("conv_maxpool_gap", &mut net, &xi, Mode::Train)?);

    let mut net = Sequential::new(
        vec![7, 7, 2],
        vec![
            Layer::Conv2d(Conv2d::new(3, 2, 3, 1, Padding::Same, he, r)?),
            Layer::Relu(Relu::new()),
            Layer::BatchNorm(BatchNorm::new(3)),
            Layer::GlobalAvgPool(GlobalAvgPool::new()),
            Layer::Dense(Dense::new(3, 2, he, r)),
        ],
    )?;
    cases.push(check_softmax("conv_batchnorm", &mut net, &xi, Mode::Train)?);

    let xb = random_tensor(&[6, 9, 9, 3], r);
    let mut net = Sequential::new(
        vec![9, 9, 3],
        vec![
            Layer::Conv2d(Conv2d::new(3, 3, 4, 2, Padding::Valid, he, r)?),
            Layer::Relu(Relu::new()),
            Layer::BatchNorm(BatchNorm::new(4)),
            Layer::MaxPool2d(MaxPool2d::new(3, 2)?),
            Layer::GlobalAvgPool(GlobalAvgPool::new()),
            Layer::Dense(Dense::new(4, 6, he, r)),
            Layer::Relu(Relu::new()),
            Layer::Dropout(Dropout::new(0.5)?),
            Layer::BatchNorm(BatchNorm::new(6)),
            Layer::Dense(Dense::new(6, 5, he, r)),
            Layer::Relu(Relu::new()),
            Layer::Dropout(Dropout::new(0.5)?),
            Layer::Dense(Dense::new(5, 2, Init::XavierUniform, r)),
        ],
    )?;
    cases.push(check_softmax("agent1_head", &mut net, &xb, Mode::Train)?);

    let x4 = random_tensor(&[6, 4], r);
    let mut net = agent2_network::<f64>(&[4, 6, 5, 3, 1], 0.2, r)?;
    let labels: Vec<u8> = (0..6).map(|i| (i % 2) as u8).collect();
    let loss = |out: &Tensor<f64>| sigmoid_cross_entropy(out, &labels);
    jitter_biases(&mut net, 5);
    let report = gradient_check(&mut net, &x4, &loss, Mode::Train, 11, DEFAULT_STEP)?;
    cases.push(GradCase { name: "agent2_head", report });

    Ok(cases)
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Mean MFCC vector using a direct DFT, explicit filter loops and a direct DCT.
pub fn naive_mfcc(x: &[f64], sr: f64, frame: usize, hop: usize, filters: usize, f_lo: f64, f_hi: f64) -> Vec<f64> {
    use std::f64::consts::PI;
    let bins = frame / 2 + 1;
    let frames = (x.len() - frame) / hop + 1;
    let (m_lo, m_hi) = (hz_to_mel(f_lo), hz_to_mel(f_hi));
    let mut edges = Vec::new();
    for i in 0..filters + 2 {
        edges.push(mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (filters + 1) as f64));
    }
    let mut mean = vec![0.0; 13];
    for t in 0..frames {
        let mut power = vec![0.0; bins];
        for (k, p) in power.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for n in 0..frame {
                let w = 0.5 * (1.0 - (2.0 * PI * n as f64 / frame as f64).cos());
                let v = x[t * hop + n] * w;
                let a = -2.0 * PI * (k * n) as f64 / frame as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            *p = re * re + im * im;
        }
        let mut logs = vec![0.0; filters];
        for m in 0..filters {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let mut e = 0.0;
            for (k, p) in power.iter().enumerate() {
                let f = k as f64 * sr / frame as f64;
                let h = if f >= lo && f <= mid {
                    (f - lo) / (mid - lo)
                } else if f > mid && f <= hi {
                    (hi - f) / (hi - mid)
                } else {
                    0.0
                };
                e += h * p;
            }
            logs[m] = if e > 1e-10 { e.ln() } else { 1e-10f64.ln() };
        }
        for (c, out) in mean.iter_mut().enumerate() {
            let mut s = 0.0;
            for (m, l) in logs.iter().enumerate() {
                s += l * (PI * c as f64 * (m as f64 + 0.5) / filters as f64).cos();
            }
            *out += s / frames as f64;
        }
    }
    mean
}

/// `P(score_pos > score_neg) + ½·P(tie)` over all positive/negative pairs.
pub fn pairwise_auc(labels: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Checks the partition property and the per-class ±1 balance bound of a
/// K-fold split. Returns a description of the first violation.
pub fn check_stratified(labels: &[u8], folds: &[Fold]) -> std::result::Result<(), String> {
    let n = labels.len();
    let mut seen = vec![0usize; n];
    for (f, fold) in folds.iter().enumerate() {
        let mut in_val = vec![false; n];
        for &i in &fold.validation {
            seen[i] += 1;
            in_val[i] = true;
        }
        let mut train = fold.train.clone();
        train.sort_unstable();
        let expected: Vec<usize> = (0..n).filter(|&i| !in_val[i]).collect();
        if train != expected {
            return Err(format!("fold {f}: train is not the complement of validation"));
        }
    }
    if let Some(i) = seen.iter().position(|&c| c != 1) {
        return Err(format!("sample {i} appears in {} validation folds", seen[i]));
    }
    for class in [0u8, 1] {
        let counts: Vec<usize> =
            folds.iter().map(|f| f.validation.iter().filter(|&&i| labels[i] == class).count()).collect();
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        if hi - lo > 1 {
            return Err(format!("class {class} fold counts {counts:?}"));
        }
    }
    Ok(())
}

pub fn sine(freq: f64, sr: u32, samples: usize) -> Vec<f64> {
    (0..samples).map(|i| 0.5 * (2.0 * std::f64::consts::PI * freq * i as f64 / sr as f64).sin()).collect()
}

pub fn white_noise(samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng::new(seed);
    (0..samples).map(|_| rng.uniform_range(-0.5, 0.5)).collect()
}

fn tokens(words: &[&str]) -> deepagent::semantic::TokenSet {
    words.iter().map(|w| w.to_string()).collect()
}

/// The lexical-similarity and feature-assembly worked examples, each with
/// whether it holds exactly.
pub fn semantic_battery() -> Vec<(&'static str, bool)> {
    use deepagent::audio::AudioEmbedding;
    use deepagent::semantic::{build_feature, lexical_similarity, FEATURE_WIDTH};

    let mut coeffs = [0.0; 13];
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c = i as f64 + 1.0;
    }
    let audio = AudioEmbedding { coeffs, present: true };
    let (a, v) = (tokens(&["a", "b"]), tokens(&["b", "c"]));

    let half = build_feature(&audio, Some(&a), Some(&v));
    let silent = build_feature(&AudioEmbedding::absent(), Some(&a), Some(&v));
    let no_text = build_feature(&audio, None, None);
    vec![
        ("s({a,b}, {b,c}) = 0.5", lexical_similarity(&a, &v) == 0.5),
        ("s(empty, V) = 0", lexical_similarity(&tokens(&[]), &v) == 0.0),
        ("s(A ⊆ V) = 1", lexical_similarity(&tokens(&["b"]), &v) == 1.0),
        (
            "audio present, s = 0.5 -> 14-vector ending in 0.5",
            half.x.len() == FEATURE_WIDTH && half.x[13] == 0.5 && half.x[..13] == coeffs,
        ),
        ("audio absent -> first 13 entries zero", silent.x[..13].iter().all(|&c| c == 0.0)),
        ("text absent -> s entry zero", no_text.x[13] == 0.0 && no_text.x[..13] == coeffs),
    ]
}
