use super::Frame;

/// Luminance `0.299 R + 0.587 G + 0.114 B`. Grayscale input is returned unchanged.
pub fn grayscale(f: &Frame) -> Frame {
    if f.channels == 1 {
        return f.clone();
    }
    let pixels = f.pixels.chunks_exact(3).map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).collect();
    Frame { channels: 1, pixels, ..*f }
}

/// Bilinear resampling with half-pixel centers (`align_corners = false`).
pub fn resize_bilinear(f: &Frame, width: usize, height: usize) -> Frame {
    if f.width == width && f.height == height {
        return f.clone();
    }
    let sx = f.width as f64 / width as f64;
    let sy = f.height as f64 / height as f64;
    let axis = |dst: usize, scale: f64, n: usize| {
        let s = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = s.floor() as usize;
        (i0, (i0 + 1).min(n - 1), s - i0 as f64)
    };
    let xs: Vec<_> = (0..width).map(|x| axis(x, sx, f.width)).collect();
    let mut out = Frame::filled(width, height, f.channels, 0.0);
    for y in 0..height {
        let (y0, y1, wy) = axis(y, sy, f.height);
        for (x, &(x0, x1, wx)) in xs.iter().enumerate() {
            for c in 0..f.channels {
                let top = f.at(x0, y0, c) * (1.0 - wx) + f.at(x1, y0, c) * wx;
                let bottom = f.at(x0, y1, c) * (1.0 - wx) + f.at(x1, y1, c) * wx;
                out.set(x, y, c, top * (1.0 - wy) + bottom * wy);
            }
        }
    }
    out
}

/// Rescales raw `[0, 255]` intensities to `[0, 1]`.
pub fn normalize(f: &Frame) -> Frame {
    Frame { pixels: f.pixels.iter().map(|&v| v / 255.0).collect(), ..*f }
}
