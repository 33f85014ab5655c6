use super::{Param, Scalar};
use crate::{Error, Result};

/// Adam with bias-corrected moments:
/// `θ ← θ − η · m̂ / (√v̂ + ε)`, `m̂ = m / (1 − β₁ᵗ)`, `v̂ = v / (1 − β₂ᵗ)`.
///
/// Moment buffers are allocated lazily on the first step, one pair per
/// parameter tensor in the order the model yields them.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    t: u64,
    moments: Vec<(Vec<T>, Vec<T>)>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Adam { learning_rate, beta1, beta2, epsilon, t: 0, moments: Vec::new() }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// First and second raw moment accumulators of parameter tensor `i`.
    pub fn moments(&self, i: usize) -> Option<(&[T], &[T])> {
        self.moments.get(i).map(|(m, v)| (m.as_slice(), v.as_slice()))
    }

    pub fn step(&mut self, params: Vec<Param<'_, T>>) -> Result<()> {
        if let Some(p) = params.iter().find(|p| !p.grad.all_finite()) {
            return Err(Error::Training(format!("non-finite gradient in {}", p.name)));
        }
        if self.moments.is_empty() {
            self.moments =
                params.iter().map(|p| (vec![T::zero(); p.value.len()], vec![T::zero(); p.value.len()])).collect();
        }
        if self.moments.len() != params.len() {
            return Err(Error::Usage(format!(
                "optimizer tracks {} tensors, model yielded {}",
                self.moments.len(),
                params.len()
            )));
        }
        self.t += 1;
        let t = self.t as i32;
        let b1 = T::lit(self.beta1);
        let b2 = T::lit(self.beta2);
        let one_b1 = T::lit(1.0 - self.beta1);
        let one_b2 = T::lit(1.0 - self.beta2);
        let c1 = T::lit(1.0 - self.beta1.powi(t));
        let c2 = T::lit(1.0 - self.beta2.powi(t));
        let lr = T::lit(self.learning_rate);
        let eps = T::lit(self.epsilon);
        for (p, (m, v)) in params.into_iter().zip(self.moments.iter_mut()) {
            if m.len() != p.value.len() {
                return Err(Error::Usage(format!("{} changed size between steps", p.name)));
            }
            for (((theta, &g), mi), vi) in
                p.value.data_mut().iter_mut().zip(p.grad.data()).zip(m.iter_mut()).zip(v.iter_mut())
            {
                *mi = b1 * *mi + one_b1 * g;
                *vi = b2 * *vi + one_b2 * g * g;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *theta = *theta - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Tensor;

    fn step_once(adam: &mut Adam<f64>, value: &mut Tensor<f64>, grad: &Tensor<f64>) -> Result<()> {
        adam.step(vec![Param { name: "w".into(), value, grad }])
    }

    #[test]
    fn zero_gradient_is_noop() {
        let mut adam = Adam::new(0.1, 0.9, 0.999, 1e-7);
        let mut w = Tensor::<f64>::from_fn(&[5], |i| i as f64 - 2.0);
        let before = w.clone();
        let g = Tensor::zeros(&[5]);
        for _ in 0..50 {
            step_once(&mut adam, &mut w, &g).unwrap();
        }
        assert_eq!(w, before);
        assert_eq!(adam.steps(), 50);
    }

    #[test]
    fn first_step_with_unit_gradient() {
        let mut adam = Adam::new(1e-4, 0.9, 0.999, 1e-7);
        let mut w = Tensor::<f64>::full(&[3], 1.0);
        step_once(&mut adam, &mut w, &Tensor::full(&[3], 1.0)).unwrap();
        let want = 1.0 - 1e-4 / (1.0 + 1e-7);
        for &v in w.data() {
            assert!((v - want).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_gradient_names_parameter() {
        let mut adam = Adam::new(1e-3, 0.9, 0.999, 1e-7);
        let mut w = Tensor::<f64>::zeros(&[2]);
        let g = Tensor::new(vec![2], vec![1.0, f64::NAN]).unwrap();
        let err = step_once(&mut adam, &mut w, &g).unwrap_err();
        assert!(matches!(err, Error::Training(ref m) if m.contains('w')));
    }
}
