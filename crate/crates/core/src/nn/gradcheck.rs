//! Central finite-difference validation of analytic gradients.

use super::{Mode, Sequential, Tensor};
use crate::rng::Rng;
use crate::Result;

pub const DEFAULT_STEP: f64 = 1e-5;

/// Loss evaluated on a network output: `(loss, ∂loss/∂output)`.
pub type LossFn<'a> = dyn Fn(&Tensor<f64>) -> Result<(f64, Tensor<f64>)> + 'a;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Name of the entry with the largest error, e.g. `layer0.conv.kernel[3]`.
    pub worst: String,
    pub checked: usize,
}

/// `|a − b| / max(|a|, |b|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares backprop gradients of every parameter and every input element
/// against central differences with step `h`.
///
/// Each evaluation replays the same random stream from `seed`, so dropout
/// masks stay fixed while parameters are perturbed.
pub fn gradient_check(
    net: &mut Sequential<f64>,
    input: &Tensor<f64>,
    loss: &LossFn<'_>,
    mode: Mode,
    seed: u64,
    h: f64,
) -> Result<GradCheckReport> {
    let rng = Rng::new(seed);
    let out = net.forward(input, mode, &mut rng.clone())?;
    let (_, g) = loss(&out)?;
    let grad_input = net.backward(&g)?;
    let analytic: Vec<(String, Vec<f64>)> =
        net.params().into_iter().map(|p| (p.name, p.grad.data().to_vec())).collect();

    let eval = |net: &mut Sequential<f64>, x: &Tensor<f64>| -> Result<f64> {
        let out = net.forward(x, mode, &mut rng.clone())?;
        Ok(loss(&out)?.0)
    };

    let mut report = GradCheckReport { max_rel_error: 0.0, worst: String::new(), checked: 0 };
    let mut record = |name: String, a: f64, fd: f64| {
        let e = relative_error(a, fd);
        report.checked += 1;
        if e > report.max_rel_error || report.worst.is_empty() {
            report.max_rel_error = e.max(report.max_rel_error);
            report.worst = name;
        }
    };

    for (pi, (name, grads)) in analytic.iter().enumerate() {
        for (j, &a) in grads.iter().enumerate() {
            let orig = net.params()[pi].value.data()[j];
            net.params()[pi].value.data_mut()[j] = orig + h;
            let plus = eval(net, input)?;
            net.params()[pi].value.data_mut()[j] = orig - h;
            let minus = eval(net, input)?;
            net.params()[pi].value.data_mut()[j] = orig;
            record(format!("{name}[{j}]"), a, (plus - minus) / (2.0 * h));
        }
    }

    let mut x = input.clone();
    for (j, &a) in grad_input.data().iter().enumerate() {
        let orig = x.data()[j];
        x.data_mut()[j] = orig + h;
        let plus = eval(net, &x)?;
        x.data_mut()[j] = orig - h;
        let minus = eval(net, &x)?;
        x.data_mut()[j] = orig;
        record(format!("input[{j}]"), a, (plus - minus) / (2.0 * h));
    }
    Ok(report)
}
