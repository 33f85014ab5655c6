use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaFeature {
    pub sample_id: String,
    /// `[ŷ₁, ŷ₂]`, or `[1−ŷ₁, ŷ₁, 1−ŷ₂, ŷ₂]` when four dimensions are requested.
    pub z: Vec<f64>,
    pub label: u8,
}

/// Aligns per-video agent scores by id. Inputs are `(id, score)` lists;
/// `labels` fixes the output order.
pub fn build_meta_features(
    agent1: &[(String, f64)],
    agent2: &[(String, f64)],
    labels: &[(String, u8)],
    dims: usize,
) -> Result<Vec<MetaFeature>> {
    if dims != 2 && dims != 4 {
        return Err(Error::Config(format!("meta_dims must be 2 or 4, got {dims}")));
    }
    let lookup = |list: &[(String, f64)]| -> std::collections::HashMap<String, f64> { list.iter().cloned().collect() };
    let (m1, m2) = (lookup(agent1), lookup(agent2));
    let mut unmatched: Vec<&str> =
        labels.iter().map(|(id, _)| id.as_str()).filter(|id| !m1.contains_key(*id) || !m2.contains_key(*id)).collect();
    let known: std::collections::HashSet<&str> = labels.iter().map(|(id, _)| id.as_str()).collect();
    unmatched.extend(agent1.iter().chain(agent2).map(|(id, _)| id.as_str()).filter(|id| !known.contains(id)));
    if agent1.len() != labels.len() || agent2.len() != labels.len() || !unmatched.is_empty() {
        unmatched.sort_unstable();
        unmatched.dedup();
        return Err(Error::Usage(format!(
            "agent scores are not aligned with the sample list; unmatched ids: {unmatched:?}"
        )));
    }
    Ok(labels
        .iter()
        .map(|(id, y)| {
            let (p1, p2) = (m1[id], m2[id]);
            let z = if dims == 2 { vec![p1, p2] } else { vec![1.0 - p1, p1, 1.0 - p2, p2] };
            MetaFeature { sample_id: id.clone(), z, label: *y }
        })
        .collect())
}

/// Per-column `(z − μ) / σ` with population σ; zero σ is replaced by 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Usage("cannot fit a standardizer on zero rows".into()))?;
        let d = first.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Usage("ragged rows passed to standardizer".into()));
        }
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..d).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n).collect();
        let std = (0..d)
            .map(|k| {
                let var = rows.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / n;
                let s = var.sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(self.mean.iter().zip(&self.std)).map(|(v, (m, s))| (v - m) / s).collect()
    }
}
