use serde::{Deserialize, Serialize};

use super::Frame;
use crate::rng::Rng;

/// Random training-time distortions, applied in field order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentPolicy {
    /// Rotation drawn from `±rotation_deg` degrees.
    pub rotation_deg: f64,
    /// Translation drawn from `±shift_frac` of each dimension.
    pub shift_frac: f64,
    /// Scale factor drawn from `1 ± zoom_frac`.
    pub zoom_frac: f64,
    pub brightness: (f64, f64),
    pub horizontal_flip: bool,
}

impl Default for AugmentPolicy {
    fn default() -> Self {
        AugmentPolicy {
            rotation_deg: 10.0,
            shift_frac: 0.1,
            zoom_frac: 0.1,
            brightness: (0.9, 1.1),
            horizontal_flip: true,
        }
    }
}

impl AugmentPolicy {
    pub fn identity() -> Self {
        AugmentPolicy {
            rotation_deg: 0.0,
            shift_frac: 0.0,
            zoom_frac: 0.0,
            brightness: (1.0, 1.0),
            horizontal_flip: false,
        }
    }
}

/// Bilinear sample at continuous pixel coordinates with edge replication.
fn sample(f: &Frame, x: f64, y: f64, c: usize) -> f64 {
    let x = x.clamp(0.0, (f.width - 1) as f64);
    let y = y.clamp(0.0, (f.height - 1) as f64);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(f.width - 1), (y0 + 1).min(f.height - 1));
    let (wx, wy) = (x - x0 as f64, y - y0 as f64);
    let top = f.at(x0, y0, c) * (1.0 - wx) + f.at(x1, y0, c) * wx;
    let bottom = f.at(x0, y1, c) * (1.0 - wx) + f.at(x1, y1, c) * wx;
    top * (1.0 - wy) + bottom * wy
}

/// Resamples `f` through an output-to-source coordinate map.
fn warp(f: &Frame, map: impl Fn(f64, f64) -> (f64, f64)) -> Frame {
    let mut out = f.clone();
    for y in 0..f.height {
        for x in 0..f.width {
            let (sx, sy) = map(x as f64, y as f64);
            for c in 0..f.channels {
                out.set(x, y, c, sample(f, sx, sy, c));
            }
        }
    }
    out
}

/// Rotation, shift, zoom, brightness and flip. Expects values in `[0, 1]`.
pub fn augment(f: &Frame, policy: &AugmentPolicy, rng: &mut Rng) -> Frame {
    let cx = (f.width as f64 - 1.0) / 2.0;
    let cy = (f.height as f64 - 1.0) / 2.0;
    let mut out = f.clone();

    let theta = rng.uniform_range(-policy.rotation_deg, policy.rotation_deg).to_radians();
    if theta != 0.0 {
        let (s, c) = theta.sin_cos();
        out = warp(&out, |x, y| {
            let (dx, dy) = (x - cx, y - cy);
            (cx + c * dx + s * dy, cy - s * dx + c * dy)
        });
    }

    let tx = rng.uniform_range(-policy.shift_frac, policy.shift_frac) * f.width as f64;
    let ty = rng.uniform_range(-policy.shift_frac, policy.shift_frac) * f.height as f64;
    if tx != 0.0 || ty != 0.0 {
        out = warp(&out, |x, y| (x - tx, y - ty));
    }

    let zoom = rng.uniform_range(1.0 - policy.zoom_frac, 1.0 + policy.zoom_frac);
    if zoom != 1.0 {
        out = warp(&out, |x, y| (cx + (x - cx) / zoom, cy + (y - cy) / zoom));
    }

    let gain = rng.uniform_range(policy.brightness.0, policy.brightness.1);
    if gain != 1.0 {
        for v in &mut out.pixels {
            *v = (*v * gain).clamp(0.0, 1.0);
        }
    }

    if policy.horizontal_flip && rng.bernoulli(0.5) {
        let src = out.clone();
        for y in 0..f.height {
            for x in 0..f.width {
                for c in 0..f.channels {
                    out.set(x, y, c, src.at(f.width - 1 - x, y, c));
                }
            }
        }
    }
    out
}
