use std::path::Path;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Parses RIFF/WAVE PCM-16, averaging stereo to mono and scaling by 1/32768.
pub fn decode_wav(bytes: &[u8]) -> std::result::Result<Waveform, String> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err("missing RIFF/WAVE header at byte 0".into());
    }
    let mut pos = 12;
    let mut format: Option<(u16, u32)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        if body + size > bytes.len() {
            return Err(format!(
                "chunk {:?} at byte {pos} truncated: declares {size} bytes, {} remain",
                String::from_utf8_lossy(id),
                bytes.len() - body
            ));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(format!("fmt chunk at byte {pos} too short"));
                }
                let audio_format = u16_at(bytes, body);
                let channels = u16_at(bytes, body + 2);
                let rate = u32_at(bytes, body + 4);
                let bits = u16_at(bytes, body + 14);
                if audio_format != 1 || bits != 16 {
                    return Err(format!(
                        "unsupported encoding at byte {body}: format {audio_format}, {bits} bits (need PCM 16-bit)"
                    ));
                }
                if !(channels == 1 || channels == 2) || rate == 0 {
                    return Err(format!("unsupported layout at byte {body}: {channels} channels, {rate} Hz"));
                }
                format = Some((channels, rate));
            }
            b"data" => {
                let (channels, rate) = format.ok_or_else(|| format!("data chunk at byte {pos} precedes fmt chunk"))?;
                let frame = 2 * channels as usize;
                if !size.is_multiple_of(frame) {
                    return Err(format!("data chunk at byte {pos} ends mid-frame"));
                }
                let samples = bytes[body..body + size]
                    .chunks_exact(frame)
                    .map(|f| {
                        let sum: f64 =
                            f.chunks_exact(2).map(|s| i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0).sum();
                        sum / channels as f64
                    })
                    .collect();
                return Ok(Waveform { samples, sample_rate: rate });
            }
            _ => {}
        }
        pos = body + size + (size & 1);
    }
    Err(format!("no data chunk found before byte {}", bytes.len()))
}

pub fn read_wav(path: &Path) -> Result<Waveform> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes).map_err(|m| Error::Ingestion(format!("{}: {m}", path.display())))
}

/// Mono PCM-16 encoding; samples are clamped to `[−1, 1]`.
pub fn encode_wav(w: &Waveform) -> Vec<u8> {
    let data_len = (w.samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&w.sample_rate.to_le_bytes());
    out.extend_from_slice(&(w.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &w.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_wav(w: &Waveform, path: &Path) -> Result<()> {
    std::fs::write(path, encode_wav(w)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(channels: u16, rate: u32, pcm: &[i16]) -> Vec<u8> {
        let mut out = Vec::new();
        let data_len = (pcm.len() * 2) as u32;
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data_len).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&rate.to_le_bytes());
        out.extend_from_slice(&(rate * 2 * channels as u32).to_le_bytes());
        out.extend_from_slice(&(2 * channels).to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&data_len.to_le_bytes());
        for s in pcm {
            out.extend_from_slice(&s.to_le_bytes());
        }
        out
    }

    #[test]
    fn mono_length_and_rate() {
        let w = decode_wav(&raw(1, 16000, &[0, 1, 2, 3, 4])).unwrap();
        assert_eq!(w.samples.len(), 5);
        assert_eq!(w.sample_rate, 16000);
    }

    #[test]
    fn antiphase_stereo_is_silent() {
        let pcm: Vec<i16> = (0..20).flat_map(|i| [i * 100, -i * 100]).collect();
        let w = decode_wav(&raw(2, 8000, &pcm)).unwrap();
        assert!(w.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn most_negative_sample_is_minus_one() {
        assert_eq!(decode_wav(&raw(1, 16000, &[-32768])).unwrap().samples, vec![-1.0]);
    }

    #[test]
    fn truncated_and_non_pcm_report_offsets() {
        let b = raw(1, 16000, &[1, 2, 3, 4]);
        let err = decode_wav(&b[..b.len() - 3]).unwrap_err();
        assert!(err.contains("byte 36"), "{err}");
        let mut f = raw(1, 16000, &[1]);
        f[20] = 3;
        assert!(decode_wav(&f).unwrap_err().contains("byte 20"));
    }

    #[test]
    fn encode_round_trip_within_quantization() {
        let w = Waveform { samples: (0..50).map(|i| (i as f64 / 7.0).sin() * 0.8).collect(), sample_rate: 16000 };
        let back = decode_wav(&encode_wav(&w)).unwrap();
        for (a, b) in w.samples.iter().zip(&back.samples) {
            assert!((a - b).abs() < 1e-4);
        }
    }
}
