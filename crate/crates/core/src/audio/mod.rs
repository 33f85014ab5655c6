//! Waveform ingestion and MFCC-mean embeddings.

mod mel;
mod mfcc;
mod resample;
mod stft;
mod wav;

pub use mel::{hz_to_mel, mel_energies, mel_to_hz, MelFilterbank};
pub use mfcc::{embed_audio, mfcc, temporal_mean, AudioConfig, AudioEmbedding, LOG_FLOOR, N_COEFFS};
pub use resample::resample;
pub use stft::{hann_window, stft, Spectrogram};
pub use wav::{decode_wav, encode_wav, read_wav, write_wav, Waveform};

pub const TARGET_RATE: u32 = 16_000;
