//! Multimodal deepfake detection: a visual CNN agent, an audio-visual
//! consistency agent, and a random-forest meta-classifier over their scores.

pub mod agents;
pub mod audio;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod nn;
pub mod par;
pub mod pipeline;
pub mod rng;
pub mod semantic;
pub mod vision;

pub use error::{Error, Result};
