use serde::{Deserialize, Serialize};

use super::{mel_energies, resample, stft, MelFilterbank, Waveform, TARGET_RATE};
use crate::Result;

pub const N_COEFFS: usize = 13;
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AudioConfig {
    pub mel_filters: usize,
    pub frame_length: usize,
    pub hop: usize,
    pub f_min: f64,
    pub f_max: f64,
}

impl Default for AudioConfig {
    fn default() -> Self {
        AudioConfig { mel_filters: 13, frame_length: 400, hop: 160, f_min: 0.0, f_max: 8000.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AudioEmbedding {
    pub coeffs: [f64; N_COEFFS],
    pub present: bool,
}

impl AudioEmbedding {
    pub fn absent() -> Self {
        AudioEmbedding { coeffs: [0.0; N_COEFFS], present: false }
    }
}

/// `M_c = Σ_{m=1..M} ln(max(E_m, floor)) · cos(π c (m − ½) / M)` for each frame.
/// Input and output are row-major with `filters` and `n_coeffs` columns.
pub fn mfcc(energies: &[f64], filters: usize, n_coeffs: usize) -> Vec<f64> {
    let basis: Vec<f64> = (0..n_coeffs)
        .flat_map(|c| {
            (0..filters).map(move |m| (std::f64::consts::PI * c as f64 * (m as f64 + 0.5) / filters as f64).cos())
        })
        .collect();
    let mut out = Vec::with_capacity(energies.len() / filters.max(1) * n_coeffs);
    for row in energies.chunks_exact(filters) {
        let logs: Vec<f64> = row.iter().map(|&e| e.max(LOG_FLOOR).ln()).collect();
        for c in 0..n_coeffs {
            let b = &basis[c * filters..(c + 1) * filters];
            out.push(b.iter().zip(&logs).map(|(x, l)| x * l).sum());
        }
    }
    out
}

fn try_embed(w: &Waveform, cfg: &AudioConfig) -> Result<[f64; N_COEFFS]> {
    let w = resample(w, TARGET_RATE);
    let spec = stft(&w, cfg.frame_length, cfg.hop)?;
    let fb = MelFilterbank::new(cfg.mel_filters, cfg.frame_length, TARGET_RATE, cfg.f_min, cfg.f_max)?;
    let energies = mel_energies(&spec, &fb)?;
    Ok(temporal_mean(&mfcc(&energies, cfg.mel_filters, N_COEFFS)))
}

/// Column means of a row-major `frames × 13` coefficient matrix.
pub fn temporal_mean(coeffs: &[f64]) -> [f64; N_COEFFS] {
    let frames = coeffs.len() / N_COEFFS;
    let mut mean = [0.0; N_COEFFS];
    for row in coeffs.chunks_exact(N_COEFFS) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= frames.max(1) as f64;
    }
    mean
}

/// Temporal mean of the MFCC matrix. Missing, short or invalid audio yields
/// zeros with `present = false`.
pub fn embed_audio(w: Option<&Waveform>, cfg: &AudioConfig) -> AudioEmbedding {
    match w.map(|w| try_embed(w, cfg)) {
        Some(Ok(coeffs)) if coeffs.iter().all(|v| v.is_finite()) => AudioEmbedding { coeffs, present: true },
        _ => AudioEmbedding::absent(),
    }
}
