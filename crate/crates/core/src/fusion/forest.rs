use serde::{Deserialize, Serialize};

use super::{DecisionTree, Standardizer};
use crate::par::{self, Exec};
use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub trees: usize,
    /// Fit each tree on an N-draw bootstrap; off fits every tree on all rows.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { trees: 100, bootstrap: true, seed: 42 }
    }
}

/// Bagged CART ensemble over standardized meta-features.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub standardizer: Option<Standardizer>,
    /// Tree `t` was grown from `Rng::derive(seed, t)`.
    pub seed: u64,
}

impl ForestModel {
    pub fn fit(rows: &[Vec<f64>], labels: &[u8], cfg: &ForestConfig, exec: Exec) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Usage(format!("{} rows vs {} labels", rows.len(), labels.len())));
        }
        let ones = labels.iter().filter(|&&y| y == 1).count();
        if ones == 0 || ones == labels.len() {
            return Err(Error::Usage("forest training needs both classes present".into()));
        }
        if cfg.trees == 0 {
            return Err(Error::Config("forest needs at least one tree".into()));
        }
        let standardizer = Standardizer::fit(rows)?;
        let x: Vec<Vec<f64>> = rows.iter().map(|r| standardizer.apply(r)).collect();
        let n = x.len();
        let trees = par::map_range(exec, cfg.trees, |t| {
            let mut rng = Rng::derive(cfg.seed, t as u64);
            let idx: Vec<usize> = if cfg.bootstrap { (0..n).map(|_| rng.below(n)).collect() } else { (0..n).collect() };
            DecisionTree::fit(&x, labels, &idx, &mut rng)
        });
        Ok(ForestModel { trees, standardizer: Some(standardizer), seed: cfg.seed })
    }

    fn prepare(&self, z: &[f64]) -> Result<Vec<f64>> {
        match &self.standardizer {
            Some(s) if !self.trees.is_empty() => {
                if z.len() != s.mean.len() {
                    return Err(Error::Usage(format!(
                        "forest expects {} meta-features, got {}",
                        s.mean.len(),
                        z.len()
                    )));
                }
                Ok(s.apply(z))
            }
            _ => Err(Error::Usage("forest model is untrained".into())),
        }
    }

    /// Per-tree votes for a raw (unstandardized) meta-feature vector.
    pub fn votes(&self, z: &[f64]) -> Result<Vec<u8>> {
        let z = self.prepare(z)?;
        Ok(self.trees.iter().map(|t| t.predict(&z)).collect())
    }

    /// Fraction of trees voting fake.
    pub fn predict_proba(&self, z: &[f64]) -> Result<f64> {
        let votes = self.votes(z)?;
        Ok(votes.iter().map(|&v| v as f64).sum::<f64>() / votes.len() as f64)
    }

    /// `(probability, label)` with label 1 iff probability ≥ 0.5.
    pub fn predict(&self, z: &[f64]) -> Result<(f64, u8)> {
        let p = self.predict_proba(z)?;
        Ok((p, u8::from(p >= 0.5)))
    }
}
