use std::path::Path;

use crate::nn::{Scalar, Tensor};
use crate::{Error, Result};

/// Interleaved row-major image, `height × width × channels`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub pixels: Vec<f64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || !(channels == 1 || channels == 3) {
            return Err(Error::Usage(format!("frame {width}x{height}x{channels} is not a valid image shape")));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::Usage(format!(
                "frame {width}x{height}x{channels} needs {} values, got {}",
                width * height * channels,
                pixels.len()
            )));
        }
        Ok(Frame { width, height, channels, pixels })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        Frame { width, height, channels, pixels: vec![value; width * height * channels] }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, c: usize) -> f64 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.pixels[(y * self.width + x) * self.channels + c] = v;
    }

    /// Copies the frame into an `[h, w, c]` tensor.
    pub fn to_tensor<T: Scalar>(&self) -> Tensor<T> {
        Tensor::from_fn(&[self.height, self.width, self.channels], |i| T::lit(self.pixels[i]))
    }

    pub fn from_tensor<T: Scalar>(t: &Tensor<T>) -> Result<Self> {
        match *t.shape() {
            [h, w, c] => Frame::new(w, h, c, t.to_f64_vec()),
            _ => Err(Error::Usage(format!("expected [h, w, c] tensor, got {:?}", t.shape()))),
        }
    }

    /// Replicates a grayscale frame into three channels. RGB frames are returned as is.
    pub fn to_rgb(&self) -> Frame {
        if self.channels == 3 {
            return self.clone();
        }
        let pixels = self.pixels.iter().flat_map(|&v| [v, v, v]).collect();
        Frame { channels: 3, pixels, ..*self }
    }
}

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: usize,
    data_start: usize,
}

fn parse_header(bytes: &[u8]) -> std::result::Result<Header, String> {
    if bytes.len() < 2 || bytes[0] != b'P' || !(bytes[1] == b'5' || bytes[1] == b'6') {
        return Err("not a binary PGM/PPM file (expected P5 or P6)".into());
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(format!("header field {} missing at byte {start}", i + 1));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("header field {} at byte {start} is not a number", i + 1))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(format!("expected whitespace after header at byte {pos}"));
    }
    Ok(Header {
        magic: [bytes[0], bytes[1]],
        width: fields[0],
        height: fields[1],
        maxval: fields[2],
        data_start: pos + 1,
    })
}

/// Parses binary PGM (P5) or PPM (P6) with maxval 255. Values stay in `[0, 255]`.
pub fn decode_pnm(bytes: &[u8]) -> std::result::Result<Frame, String> {
    let h = parse_header(bytes)?;
    if h.maxval != 255 {
        return Err(format!("maxval {} unsupported (only 255)", h.maxval));
    }
    if h.width == 0 || h.height == 0 {
        return Err(format!("degenerate size {}x{}", h.width, h.height));
    }
    let channels = if h.magic[1] == b'5' { 1 } else { 3 };
    let n = h.width * h.height * channels;
    let data = bytes
        .get(h.data_start..h.data_start + n)
        .ok_or_else(|| format!("pixel data truncated: need {n} bytes from byte {}", h.data_start))?;
    Ok(Frame { width: h.width, height: h.height, channels, pixels: data.iter().map(|&b| b as f64).collect() })
}

pub fn load_frame(path: &Path) -> Result<Frame> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes).map_err(|m| Error::Ingestion(format!("{}: {m}", path.display())))
}

/// Encodes a `[0, 255]` frame as P5/P6, rounding and clamping each value.
pub fn encode_pnm(frame: &Frame) -> Vec<u8> {
    let magic = if frame.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend(frame.pixels.iter().map(|&v| v.round().clamp(0.0, 255.0) as u8));
    out
}

pub fn save_frame(frame: &Frame, path: &Path) -> Result<()> {
    std::fs::write(path, encode_pnm(frame)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p5_bytes_are_preserved() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0, 128, 255, 64]);
        let f = decode_pnm(&bytes).unwrap();
        assert_eq!((f.width, f.height, f.channels), (2, 2, 1));
        assert_eq!(f.pixels, vec![0.0, 128.0, 255.0, 64.0]);
    }

    #[test]
    fn p6_single_pixel() {
        let mut bytes = b"P6 # red\n1 1 255\n".to_vec();
        bytes.extend([255, 0, 0]);
        let f = decode_pnm(&bytes).unwrap();
        assert_eq!(f.channels, 3);
        assert_eq!(f.pixels, vec![255.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_other_maxval_and_truncation() {
        let mut bytes = b"P5\n1 1\n65535\n".to_vec();
        bytes.extend([0, 0]);
        assert!(decode_pnm(&bytes).unwrap_err().contains("maxval"));
        assert!(decode_pnm(b"P5\n2 2\n255\n\x01").unwrap_err().contains("truncated"));
        assert!(decode_pnm(b"P3\n1 1\n255\n0").is_err());
    }

    #[test]
    fn encode_decode_round_trip() {
        let f = Frame::new(3, 2, 3, (0..18).map(|v| (v * 14) as f64).collect()).unwrap();
        assert_eq!(decode_pnm(&encode_pnm(&f)).unwrap(), f);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_frame(Path::new("/nonexistent/frame.pgm")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
