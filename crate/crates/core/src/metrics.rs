//! Binary classification metrics. Class 1 is the positive ("fake") class.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Counts with class 1 as positive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

/// A ratio that may have had a zero denominator; `value` is 0 in that case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub undefined: bool,
}

impl Ratio {
    pub fn of(num: usize, den: usize) -> Self {
        if den == 0 {
            Ratio { value: 0.0, undefined: true }
        } else {
            Ratio { value: num as f64 / den as f64, undefined: false }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

pub fn confusion(labels: &[u8], predictions: &[u8]) -> Result<ConfusionMatrix> {
    if labels.len() != predictions.len() {
        return Err(Error::Usage(format!("{} labels vs {} predictions", labels.len(), predictions.len())));
    }
    let mut cm = ConfusionMatrix::default();
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            (0, 0) => cm.tn += 1,
            _ => return Err(Error::Usage(format!("labels must be 0/1, got ({y}, {p})"))),
        }
    }
    Ok(cm)
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Counts from the point of view of `class`.
    pub fn class(&self, class: u8) -> ClassCounts {
        if class == 1 {
            ClassCounts { tp: self.tp, fp: self.fp, fn_: self.fn_ }
        } else {
            ClassCounts { tp: self.tn, fp: self.fn_, fn_: self.fp }
        }
    }

    pub fn accuracy(&self) -> Ratio {
        Ratio::of(self.tp + self.tn, self.total())
    }

    pub fn precision(&self, class: u8) -> Ratio {
        let c = self.class(class);
        Ratio::of(c.tp, c.tp + c.fp)
    }

    pub fn recall(&self, class: u8) -> Ratio {
        let c = self.class(class);
        Ratio::of(c.tp, c.tp + c.fn_)
    }

    /// `2TP / (2TP + FP + FN)`.
    pub fn f1(&self, class: u8) -> Ratio {
        let c = self.class(class);
        Ratio::of(2 * c.tp, 2 * c.tp + c.fp + c.fn_)
    }

    pub fn macro_f1(&self) -> f64 {
        (self.f1(0).value + self.f1(1).value) / 2.0
    }

    /// Rows are true class 0 and 1, columns predicted class 0 and 1.
    pub fn as_rows(&self) -> [[usize; 2]; 2] {
        [[self.tn, self.fp], [self.fn_, self.tp]]
    }
}

pub fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    cm.macro_f1()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Infinite sentinels are written as the strings `"inf"` and `"-inf"`.
    #[serde(with = "extended_f64")]
    pub threshold: f64,
}

mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("invalid threshold {other:?}"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// From `(0, 0)` at threshold `+∞` to `(1, 1)` at `−∞`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC over every distinct score (predict positive when `score ≥ threshold`),
/// with trapezoidal area.
pub fn roc_auc(labels: &[u8], scores: &[f64]) -> Result<RocCurve> {
    if labels.len() != scores.len() {
        return Err(Error::Usage(format!("{} labels vs {} scores", labels.len(), scores.len())));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Usage("ROC needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0, threshold: f64::INFINITY }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint { fpr: fp as f64 / neg as f64, tpr: tp as f64 / pos as f64, threshold: s });
    }
    points.push(RocPoint { fpr: 1.0, tpr: 1.0, threshold: f64::NEG_INFINITY });
    let auc = points.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0).sum();
    Ok(RocCurve { points, auc })
}

/// Fractions in `[0, 1]`; per-class vectors are indexed by class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision_per_class: [f64; 2],
    pub recall_per_class: [f64; 2],
    pub f1_per_class: [f64; 2],
    pub macro_f1: f64,
    pub auc: Option<f64>,
    pub confusion: [[usize; 2]; 2],
    /// Names of ratios whose denominator was zero.
    pub undefined: Vec<String>,
}

pub fn evaluate(labels: &[u8], scores: &[f64], threshold: f64) -> Result<MetricReport> {
    let preds: Vec<u8> = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
    let cm = confusion(labels, &preds)?;
    let mut undefined = Vec::new();
    let mut take = |name: String, r: Ratio| {
        if r.undefined {
            undefined.push(name);
        }
        r.value
    };
    let accuracy = take("accuracy".into(), cm.accuracy());
    let precision_per_class = [0u8, 1].map(|c| take(format!("precision_{c}"), cm.precision(c)));
    let recall_per_class = [0u8, 1].map(|c| take(format!("recall_{c}"), cm.recall(c)));
    let f1_per_class = [0u8, 1].map(|c| take(format!("f1_{c}"), cm.f1(c)));
    let auc = roc_auc(labels, scores).ok().map(|r| r.auc);
    Ok(MetricReport {
        accuracy,
        precision_per_class,
        recall_per_class,
        f1_per_class,
        macro_f1: cm.macro_f1(),
        auc,
        confusion: cm.as_rows(),
        undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_examples() {
        let cm = confusion(&[1, 0, 1, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!((cm.tp, cm.tn, cm.fp, cm.fn_), (2, 2, 0, 0));
        let wrong = confusion(&[1, 0, 1, 0], &[0, 1, 0, 1]).unwrap();
        assert_eq!(wrong.tp + wrong.tn, 0);
        let cm = confusion(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!((cm.tp, cm.fn_, cm.fp, cm.tn), (1, 1, 1, 1));
        assert!(confusion(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn f1_examples() {
        let perfect = confusion(&[1, 0, 1, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!(perfect.macro_f1(), 1.0);
        let half = confusion(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!((half.f1(0).value, half.f1(1).value), (0.5, 0.5));
        assert_eq!(half.macro_f1(), 0.5);
        assert_eq!((half.precision(1).value, half.recall(1).value), (0.5, 0.5));
        let ones = confusion(&[1, 1, 0, 0], &[1, 1, 1, 1]).unwrap();
        assert!((ones.f1(1).value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(ones.f1(0).value, 0.0);
        assert!((ones.macro_f1() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn no_positive_predictions_flags_precision() {
        let cm = confusion(&[1, 0], &[0, 0]).unwrap();
        let p = cm.precision(1);
        assert_eq!(p, Ratio { value: 0.0, undefined: true });
        let r = evaluate(&[1, 0], &[0.1, 0.2], 0.5).unwrap();
        assert!(r.undefined.contains(&"precision_1".to_string()));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[1, 1, 0, 0], &[0.9, 0.8, 0.2, 0.1]).unwrap().auc, 1.0);
        assert_eq!(roc_auc(&[1, 0, 1, 0], &[0.3; 4]).unwrap().auc, 0.5);
        assert_eq!(roc_auc(&[1, 0, 1, 0], &[0.9, 0.8, 0.7, 0.1]).unwrap().auc, 0.75);
        assert!(roc_auc(&[1, 1], &[0.2, 0.3]).is_err());
    }

    #[test]
    fn roc_endpoints_and_monotone() {
        let r = roc_auc(&[0, 1, 1, 0, 1], &[0.2, 0.9, 0.2, 0.5, 0.7]).unwrap();
        let first = r.points.first().unwrap();
        let last = r.points.last().unwrap();
        assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        assert!(r.points.windows(2).all(|w| w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr));
    }
}
