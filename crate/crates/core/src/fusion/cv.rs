use serde::{Deserialize, Serialize};

use super::{stratified_kfold, ForestConfig, ForestModel, MetaFeature};
use crate::metrics::{confusion, roc_auc, RocPoint};
use crate::par::{self, Exec};
use crate::rng::Rng;
use crate::Result;

/// One row of the fold table. Values are fractions in `[0, 1]`;
/// rendered tables show them as percentages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    /// `"1"`…`"K"`, or `"mean"`.
    pub fold: String,
    pub accuracy: f64,
    /// Fake-class precision.
    pub precision: f64,
    /// Fake-class recall.
    pub recall: f64,
    /// Macro F1.
    pub f1: f64,
    pub auc: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldRoc {
    pub fold: usize,
    pub points: Vec<RocPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub folds: Vec<FoldResult>,
    pub mean: FoldResult,
    pub rocs: Vec<FoldRoc>,
}

impl CvOutcome {
    pub fn mean_f1(&self) -> f64 {
        self.mean.f1
    }
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    Rng::derive(seed, 1 << 32 | fold as u64).next_u64()
}

/// Stratified K-fold evaluation of the forest. Each fold fits its own
/// standardizer and forest on the training part only.
pub fn cross_validate(data: &[MetaFeature], k: usize, forest: &ForestConfig, exec: Exec) -> Result<CvOutcome> {
    let labels: Vec<u8> = data.iter().map(|m| m.label).collect();
    let folds = stratified_kfold(&labels, k, forest.seed)?;
    let results = par::map_range(exec, folds.len(), |i| -> Result<(FoldResult, Vec<RocPoint>)> {
        let fold = &folds[i];
        let rows: Vec<Vec<f64>> = fold.train.iter().map(|&j| data[j].z.clone()).collect();
        let ys: Vec<u8> = fold.train.iter().map(|&j| labels[j]).collect();
        let cfg = ForestConfig { seed: fold_seed(forest.seed, i), ..*forest };
        let model = ForestModel::fit(&rows, &ys, &cfg, exec)?;
        let mut probs = Vec::with_capacity(fold.validation.len());
        let mut preds = Vec::with_capacity(fold.validation.len());
        for &j in &fold.validation {
            let (p, y) = model.predict(&data[j].z)?;
            probs.push(p);
            preds.push(y);
        }
        let truth: Vec<u8> = fold.validation.iter().map(|&j| labels[j]).collect();
        let cm = confusion(&truth, &preds)?;
        let roc = roc_auc(&truth, &probs)?;
        let row = FoldResult {
            fold: (i + 1).to_string(),
            accuracy: cm.accuracy().value,
            precision: cm.precision(1).value,
            recall: cm.recall(1).value,
            f1: cm.macro_f1(),
            auc: roc.auc,
            precision_macro: 0.5 * (cm.precision(0).value + cm.precision(1).value),
            recall_macro: 0.5 * (cm.recall(0).value + cm.recall(1).value),
        };
        Ok((row, roc.points))
    });
    let mut rows = Vec::with_capacity(k);
    let mut rocs = Vec::with_capacity(k);
    for (i, r) in results.into_iter().enumerate() {
        let (row, points) = r?;
        rows.push(row);
        rocs.push(FoldRoc { fold: i + 1, points });
    }
    let avg = |f: fn(&FoldResult) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    let mean = FoldResult {
        fold: "mean".into(),
        accuracy: avg(|r| r.accuracy),
        precision: avg(|r| r.precision),
        recall: avg(|r| r.recall),
        f1: avg(|r| r.f1),
        auc: avg(|r| r.auc),
        precision_macro: avg(|r| r.precision_macro),
        recall_macro: avg(|r| r.recall_macro),
    };
    Ok(CvOutcome { folds: rows, mean, rocs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(scores: impl Fn(usize, u8, &mut Rng) -> Vec<f64>) -> Vec<MetaFeature> {
        let mut rng = Rng::new(11);
        (0..60)
            .map(|i| {
                let label = (i % 2) as u8;
                MetaFeature { sample_id: format!("s{i}"), z: scores(i, label, &mut rng), label }
            })
            .collect()
    }

    #[test]
    fn separable_scores_give_perfect_f1() {
        let data = meta(|_, y, rng| vec![y as f64 + rng.uniform_range(-0.01, 0.01), rng.uniform()]);
        let out = cross_validate(&data, 5, &ForestConfig::default(), Exec::default()).unwrap();
        assert_eq!(out.mean_f1(), 1.0);
        assert_eq!(out.folds.len(), 5);
    }

    #[test]
    fn constant_scores_are_chance() {
        let data = meta(|_, _, _| vec![0.5, 0.5]);
        let out = cross_validate(&data, 5, &ForestConfig::default(), Exec::default()).unwrap();
        assert!((out.mean.accuracy - 0.5).abs() <= 0.1);
    }

    #[test]
    fn repeatable_across_runs_and_exec_modes() {
        let data = meta(|_, y, rng| vec![0.3 * y as f64 + rng.uniform(), rng.uniform()]);
        let a = cross_validate(&data, 5, &ForestConfig::default(), Exec::Sequential).unwrap();
        let b = cross_validate(&data, 5, &ForestConfig::default(), Exec::default()).unwrap();
        assert_eq!(a, b);
    }
}
