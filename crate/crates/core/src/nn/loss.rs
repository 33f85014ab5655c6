//! Cross-entropy losses.
//!
//! The fused `*_with_logits` forms return the batch-mean loss and its gradient
//! with respect to the logits; they are what training uses.

use super::activation::{sigmoid, softmax};
use super::{Scalar, Tensor};
use crate::{Error, Result};

pub const PROB_FLOOR: f64 = 1e-12;

/// Categorical cross-entropy `−Σ y_i log ŷ_i` for a one-hot `y_true`.
pub fn cce_loss(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Usage(format!("cce: {} labels vs {} predictions", y_true.len(), y_pred.len())));
    }
    let ones = y_true.iter().filter(|&&v| v == 1.0).count();
    if ones != 1 || y_true.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Usage(format!("cce: y_true {y_true:?} is not one-hot")));
    }
    Ok(y_true.iter().zip(y_pred).map(|(&y, &p)| -y * p.clamp(PROB_FLOOR, 1.0).ln()).sum::<f64>().max(0.0))
}

/// Binary cross-entropy `−y log ŷ − (1−y) log(1−ŷ)`.
pub fn bce_loss(y: f64, y_hat: f64) -> Result<f64> {
    if y != 0.0 && y != 1.0 {
        return Err(Error::Usage(format!("bce: label must be 0 or 1, got {y}")));
    }
    let p = y_hat.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    Ok(-y * p.ln() - (1.0 - y) * (1.0 - p).ln())
}

/// Softmax + CCE over a `[n, c]` logit batch with class indices `labels`.
pub fn softmax_cross_entropy<T: Scalar>(logits: &Tensor<T>, labels: &[usize]) -> Result<(f64, Tensor<T>)> {
    let (n, c) = logits.dims2()?;
    if labels.len() != n {
        return Err(Error::Usage(format!("{} labels for a batch of {n}", labels.len())));
    }
    let inv_n = T::lit(1.0 / n as f64);
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(n * c);
    for (row, &y) in logits.data().chunks(c).zip(labels) {
        if y >= c {
            return Err(Error::Usage(format!("class {y} out of range for {c} classes")));
        }
        let p = softmax(row);
        loss -= p[y].as_f64().max(PROB_FLOOR).ln();
        for (i, &pi) in p.iter().enumerate() {
            let t = if i == y { T::one() } else { T::zero() };
            grad.push((pi - t) * inv_n);
        }
    }
    Ok((loss / n as f64, Tensor::new(vec![n, c], grad)?))
}

/// Sigmoid + BCE over `[n, 1]` logits with 0/1 labels.
pub fn sigmoid_cross_entropy<T: Scalar>(logits: &Tensor<T>, labels: &[u8]) -> Result<(f64, Tensor<T>)> {
    let (n, c) = logits.dims2()?;
    if c != 1 || labels.len() != n {
        return Err(Error::Usage(format!(
            "sigmoid cross-entropy needs [n,1] logits and n labels, got {:?} and {}",
            logits.shape(),
            labels.len()
        )));
    }
    let inv_n = T::lit(1.0 / n as f64);
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(n);
    for (&z, &y) in logits.data().iter().zip(labels) {
        if y > 1 {
            return Err(Error::Usage(format!("bce: label must be 0 or 1, got {y}")));
        }
        let p = sigmoid(z);
        loss += bce_loss(y as f64, p.as_f64())?;
        grad.push((p - T::lit(y as f64)) * inv_n);
    }
    Ok((loss / n as f64, Tensor::new(vec![n, 1], grad)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn cce_examples() {
        assert!(cce_loss(&[1.0, 0.0], &[1.0, 0.0]).unwrap() <= 1e-11);
        let l = cce_loss(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(cce_loss(&[0.5, 0.5], &[0.5, 0.5]).is_err());
        assert!(cce_loss(&[1.0, 1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn cce_nonnegative_on_random_simplex() {
        let mut rng = Rng::new(11);
        for _ in 0..1000 {
            let c = 2 + rng.below(5);
            let raw: Vec<f64> = (0..c).map(|_| rng.uniform()).collect();
            let s: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let mut y = vec![0.0; c];
            y[rng.below(c)] = 1.0;
            assert!(cce_loss(&y, &p).unwrap() >= 0.0);
        }
    }

    #[test]
    fn bce_examples() {
        assert!(bce_loss(1.0, 1.0 - 1e-12).unwrap() < 1e-11);
        assert!((bce_loss(1.0, 0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(bce_loss(0.5, 0.5).is_err());
        let mut rng = Rng::new(3);
        for _ in 0..100 {
            let p = rng.uniform();
            let a = bce_loss(0.0, p).unwrap();
            let b = bce_loss(1.0, 1.0 - p).unwrap();
            assert!((a - b).abs() < 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn fused_softmax_gradient_is_p_minus_y() {
        let logits = Tensor::<f64>::new(vec![1, 2], vec![0.0, 0.0]).unwrap();
        let (l, g) = softmax_cross_entropy(&logits, &[1]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(g.data(), &[0.5, -0.5]);
    }
}
