use super::Spectrogram;
use crate::{Error, Result};

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters with centers evenly spaced on the mel scale.
#[derive(Clone, Debug, PartialEq)]
pub struct MelFilterbank {
    /// `filters × bins` row-major.
    pub weights: Vec<f64>,
    pub filters: usize,
    pub bins: usize,
    pub f_min: f64,
    pub f_max: f64,
}

impl MelFilterbank {
    pub fn new(filters: usize, frame_length: usize, sample_rate: u32, f_min: f64, f_max: f64) -> Result<Self> {
        if filters == 0 || frame_length < 2 || !(0.0 <= f_min && f_min < f_max) {
            return Err(Error::Config(format!(
                "invalid mel filterbank: {filters} filters, frame {frame_length}, {f_min}..{f_max} Hz"
            )));
        }
        let bins = frame_length / 2 + 1;
        let (m_lo, m_hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
        let edges: Vec<f64> =
            (0..filters + 2).map(|i| mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (filters + 1) as f64)).collect();
        let bin_hz = sample_rate as f64 / frame_length as f64;
        let mut weights = vec![0.0; filters * bins];
        for m in 0..filters {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            for k in 0..bins {
                let f = k as f64 * bin_hz;
                let up = (f - lo) / (mid - lo);
                let down = (hi - f) / (hi - mid);
                weights[m * bins + k] = up.min(down).max(0.0);
            }
        }
        Ok(MelFilterbank { weights, filters, bins, f_min, f_max })
    }

    pub fn filter(&self, m: usize) -> &[f64] {
        &self.weights[m * self.bins..(m + 1) * self.bins]
    }
}

/// `E_m(τ) = Σ_f H_m(f)·|S(f, τ)|²`, returned `frames × filters` row-major.
pub fn mel_energies(spec: &Spectrogram, fb: &MelFilterbank) -> Result<Vec<f64>> {
    if spec.bins != fb.bins {
        return Err(Error::Config(format!("filterbank has {} bins, spectrogram {}", fb.bins, spec.bins)));
    }
    let mut out = Vec::with_capacity(spec.frames * fb.filters);
    for t in 0..spec.frames {
        let power: Vec<f64> = spec.frame(t).iter().map(|m| m * m).collect();
        for m in 0..fb.filters {
            out.push(fb.filter(m).iter().zip(&power).map(|(h, p)| h * p).sum());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_are_nonnegative_unimodal() {
        let fb = MelFilterbank::new(13, 400, 16000, 0.0, 8000.0).unwrap();
        for m in 0..fb.filters {
            let w = fb.filter(m);
            assert!(w.iter().all(|&v| v >= 0.0));
            let peak = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
            assert!(w[..=peak].windows(2).all(|p| p[0] <= p[1]));
            assert!(w[peak..].windows(2).all(|p| p[0] >= p[1]));
            assert!(w[peak] > 0.0);
        }
        for m in 0..fb.filters - 1 {
            let overlap = fb.filter(m).iter().zip(fb.filter(m + 1)).any(|(a, b)| *a > 0.0 && *b > 0.0);
            assert!(overlap, "filters {m} and {} do not overlap", m + 1);
        }
    }

    #[test]
    fn unit_and_zero_spectra() {
        let fb = MelFilterbank::new(13, 400, 16000, 0.0, 8000.0).unwrap();
        let unit = Spectrogram { magnitudes: vec![1.0; 201], frames: 1, bins: 201, frame_length: 400, hop: 160 };
        let e = mel_energies(&unit, &fb).unwrap();
        for m in 0..13 {
            assert!((e[m] - fb.filter(m).iter().sum::<f64>()).abs() < 1e-12);
        }
        let zero = Spectrogram { magnitudes: vec![0.0; 201], ..unit };
        assert!(mel_energies(&zero, &fb).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mel_scale_round_trips() {
        for f in [0.0, 440.0, 1000.0, 7999.0] {
            assert!((mel_to_hz(hz_to_mel(f)) - f).abs() < 1e-9);
        }
    }
}
