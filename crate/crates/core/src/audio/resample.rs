use super::Waveform;

/// Linear-interpolation resampling to `target` Hz.
/// Output length is `round(len · target / source)`.
pub fn resample(w: &Waveform, target: u32) -> Waveform {
    if w.sample_rate == target || w.samples.is_empty() {
        return Waveform { samples: w.samples.clone(), sample_rate: target };
    }
    let ratio = w.sample_rate as f64 / target as f64;
    let n_out = (w.samples.len() as f64 * target as f64 / w.sample_rate as f64).round() as usize;
    let last = w.samples.len() - 1;
    let samples = (0..n_out)
        .map(|i| {
            let pos = i as f64 * ratio;
            let i0 = (pos.floor() as usize).min(last);
            let i1 = (i0 + 1).min(last);
            let frac = pos - i0 as f64;
            w.samples[i0] * (1.0 - frac) + w.samples[i1] * frac
        })
        .collect();
    Waveform { samples, sample_rate: target }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_target_rate() {
        let w = Waveform { samples: vec![0.1, -0.2, 0.3], sample_rate: 16000 };
        assert_eq!(resample(&w, 16000), w);
    }

    #[test]
    fn halving_rate_halves_length() {
        let w = Waveform { samples: (0..200).map(|i| i as f64 / 200.0).collect(), sample_rate: 32000 };
        let r = resample(&w, 16000);
        assert_eq!(r.samples.len(), 100);
        assert_eq!(r.samples[3], w.samples[6]);
    }
}
