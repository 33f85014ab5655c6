use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::Waveform;
use crate::{Error, Result};

/// Magnitude spectrogram, `frames × bins` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    pub magnitudes: Vec<f64>,
    pub frames: usize,
    pub bins: usize,
    pub frame_length: usize,
    pub hop: usize,
}

impl Spectrogram {
    pub fn frame(&self, t: usize) -> &[f64] {
        &self.magnitudes[t * self.bins..(t + 1) * self.bins]
    }
}

/// Periodic Hann window `0.5 − 0.5 cos(2πn/N)`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()).collect()
}

/// Hann-windowed STFT without padding; `floor((len − frame_length)/hop) + 1` frames.
pub fn stft(w: &Waveform, frame_length: usize, hop: usize) -> Result<Spectrogram> {
    if frame_length == 0 || hop == 0 {
        return Err(Error::Config("stft frame length and hop must be positive".into()));
    }
    if w.samples.len() < frame_length {
        return Err(Error::Feature(format!(
            "signal of {} samples is shorter than one {frame_length}-sample frame",
            w.samples.len()
        )));
    }
    let frames = (w.samples.len() - frame_length) / hop + 1;
    let bins = frame_length / 2 + 1;
    let window = hann_window(frame_length);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(frame_length);
    let mut buf = vec![Complex::new(0.0, 0.0); frame_length];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut magnitudes = Vec::with_capacity(frames * bins);
    for t in 0..frames {
        let seg = &w.samples[t * hop..t * hop + frame_length];
        for ((b, &s), &h) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex::new(s * h, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        magnitudes.extend(buf[..bins].iter().map(|c| c.norm()));
    }
    Ok(Spectrogram { magnitudes, frames, bins, frame_length, hop })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, n: usize) -> Waveform {
        Waveform {
            samples: (0..n).map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / 16000.0).sin()).collect(),
            sample_rate: 16000,
        }
    }

    #[test]
    fn silence_gives_zero_magnitudes() {
        let w = Waveform { samples: vec![0.0; 1000], sample_rate: 16000 };
        assert!(stft(&w, 400, 160).unwrap().magnitudes.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn one_second_has_98_frames() {
        let s = stft(&tone(440.0, 16000), 400, 160).unwrap();
        assert_eq!((s.frames, s.bins), (98, 201));
    }

    #[test]
    fn tone_peaks_at_expected_bin() {
        let s = stft(&tone(1000.0, 4000), 400, 160).unwrap();
        for t in 0..s.frames {
            let row = s.frame(t);
            let peak = (0..s.bins).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            assert_eq!(peak, 25);
        }
    }

    #[test]
    fn short_signal_is_feature_error() {
        let err = stft(&tone(440.0, 399), 400, 160).unwrap_err();
        assert!(matches!(err, Error::Feature(_)));
    }
}
