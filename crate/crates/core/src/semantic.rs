//! Cross-modal lexical similarity and the 14-dimensional multimodal feature.

use std::collections::BTreeSet;

use crate::audio::{AudioEmbedding, N_COEFFS};

pub const FEATURE_WIDTH: usize = N_COEFFS + 1;

pub type TokenSet = BTreeSet<String>;

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(text: &str) -> TokenSet {
    text.to_lowercase().split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_owned).collect()
}

/// `|A ∩ V| / max(|A|, 1)`, normalized by the transcript side only.
pub fn lexical_similarity(asr: &TokenSet, ocr: &TokenSet) -> f64 {
    asr.intersection(ocr).count() as f64 / asr.len().max(1) as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultimodalFeature {
    pub x: [f64; FEATURE_WIDTH],
    pub audio_present: bool,
    pub text_present: bool,
}

impl MultimodalFeature {
    pub fn similarity(&self) -> f64 {
        self.x[N_COEFFS]
    }
}

/// MFCC means followed by `s`; `s` is 0 unless both token sets are present.
pub fn build_feature(audio: &AudioEmbedding, asr: Option<&TokenSet>, ocr: Option<&TokenSet>) -> MultimodalFeature {
    let mut x = [0.0; FEATURE_WIDTH];
    if audio.present {
        x[..N_COEFFS].copy_from_slice(&audio.coeffs);
    }
    let text_present = asr.is_some() && ocr.is_some();
    if let (Some(a), Some(v)) = (asr, ocr) {
        x[N_COEFFS] = lexical_similarity(a, v);
    }
    MultimodalFeature { x, audio_present: audio.present, text_present }
}
