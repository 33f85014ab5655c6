use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::TrainConfig;
use crate::audio::AudioConfig;
use crate::fusion::ForestConfig;
use crate::vision::{AugmentPolicy, FramePolicy};
use crate::{Error, Result};

pub const CONFIG_ENV: &str = "DEEPAGENT_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions { train: 0.7, val: 0.2, test: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F32,
    F64,
}

/// Which samples feed the meta-classifier's cross-validation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionSamples {
    /// Validation and test samples, which neither agent was fitted on.
    #[default]
    Heldout,
    All,
}

/// Pipeline settings. Every field has a default, so `{}` is a valid file.
/// Agent and forest seeds are taken from the top-level `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub split: SplitFractions,
    pub frame_policy: FramePolicy,
    pub m: usize,
    pub meta_dims: usize,
    pub mel_filters: usize,
    pub desk_scale: bool,
    /// Frame side length used when `desk_scale` is set.
    pub desk_input: usize,
    /// Agent-1 epoch cap when `desk_scale` is set.
    pub desk_epochs: usize,
    pub precision: Precision,
    pub augment: bool,
    pub augment_policy: AugmentPolicy,
    pub agent1: TrainConfig,
    pub agent2: TrainConfig,
    pub forest: ForestConfig,
    pub folds: usize,
    pub fusion_samples: FusionSamples,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            split: SplitFractions::default(),
            frame_policy: FramePolicy::Even,
            m: 30,
            meta_dims: 2,
            mel_filters: 13,
            desk_scale: false,
            desk_input: crate::agents::DESK_INPUT,
            desk_epochs: 12,
            precision: Precision::F32,
            augment: true,
            augment_policy: AugmentPolicy::default(),
            agent1: TrainConfig::agent1(),
            agent2: TrainConfig::agent2(),
            forest: ForestConfig::default(),
            folds: 5,
            fusion_samples: FusionSamples::Heldout,
        }
    }
}

impl PipelineConfig {
    /// Reads `path`, or the file named by `DEEPAGENT_CONFIG`, or falls back to defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let path: Option<PathBuf> =
            path.map(Path::to_path_buf).or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        let cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|e| match e.kind() {
                    std::io::ErrorKind::NotFound => Error::Config(format!("config file {} not found", p.display())),
                    _ => Error::io(&p, e),
                })?;
                PipelineConfig::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => PipelineConfig::default(),
        };
        Ok(cfg)
    }

    /// Parses a JSON document laid over the defaults, so a partial nested
    /// object keeps the remaining defaults of that object.
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let user: serde_json::Value = serde_json::from_str(text)?;
        let mut merged = serde_json::to_value(PipelineConfig::default())?;
        merge(&mut merged, user);
        serde_json::from_value(merged)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.split;
        let parts = [s.train, s.val, s.test];
        if parts.iter().any(|f| !(0.0..=1.0).contains(f)) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions {}/{}/{} must lie in [0,1] and sum to 1",
                s.train, s.val, s.test
            )));
        }
        if self.meta_dims != 2 && self.meta_dims != 4 {
            return Err(Error::Config(format!("meta_dims must be 2 or 4, got {}", self.meta_dims)));
        }
        if self.m == 0 || self.mel_filters == 0 || self.desk_input < 16 || self.folds < 2 {
            return Err(Error::Config(
                "m and mel_filters must be positive, desk_input at least 16, folds at least 2".into(),
            ));
        }
        for (name, t) in [("agent1", &self.agent1), ("agent2", &self.agent2)] {
            if t.batch_size == 0 || t.learning_rate < 0.0 || !t.learning_rate.is_finite() {
                return Err(Error::Config(format!(
                    "{name}: batch_size must be positive and learning_rate finite and ≥ 0"
                )));
            }
        }
        Ok(())
    }

    pub fn audio(&self) -> AudioConfig {
        AudioConfig { mel_filters: self.mel_filters, ..AudioConfig::default() }
    }

    pub fn frame_side(&self) -> usize {
        if self.desk_scale {
            self.desk_input
        } else {
            crate::vision::AGENT1_INPUT
        }
    }

    pub fn agent1_train(&self) -> TrainConfig {
        let mut t = self.agent1.clone();
        t.seed = self.seed;
        if self.desk_scale {
            t.epochs = t.epochs.min(self.desk_epochs);
        }
        t
    }

    pub fn agent2_train(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.agent2.clone() }
    }

    pub fn forest_config(&self) -> ForestConfig {
        ForestConfig { seed: self.seed, ..self.forest }
    }
}

fn merge(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
