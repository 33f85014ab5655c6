//! "DAFT" binary container for per-sample vectors.
//!
//! ```text
//! "DAFT" | version u32 | entry count u32
//! entry: key length u32 | key UTF-8 | dtype code u32 | rank u32 | dims u32… | payload offset u64
//! payloads: little-endian IEEE-754, in key order
//! ```
//!
//! Integers are little-endian; offsets are absolute byte positions.

use std::collections::BTreeMap;
use std::path::Path;

use crate::nn::DType;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DAFT";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntry {
    pub dtype: DType,
    pub shape: Vec<usize>,
    /// Raw little-endian payload.
    pub bytes: Vec<u8>,
}

impl CacheEntry {
    pub fn to_f64(&self) -> Vec<f64> {
        match self.dtype {
            DType::F64 => {
                self.bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect()
            }
            DType::F32 => {
                self.bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64).collect()
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureCache {
    pub entries: BTreeMap<String, CacheEntry>,
}

impl FeatureCache {
    pub fn put_f64(&mut self, key: impl Into<String>, shape: Vec<usize>, values: &[f64]) {
        debug_assert_eq!(shape.iter().product::<usize>(), values.len());
        let bytes = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        self.entries.insert(key.into(), CacheEntry { dtype: DType::F64, shape, bytes });
    }

    pub fn get_f64(&self, key: &str) -> Option<Vec<f64>> {
        self.entries.get(key).map(CacheEntry::to_f64)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut table = Vec::new();
        let header_len = 12 + self.entries.iter().map(|(k, e)| 4 + k.len() + 8 + 4 * e.shape.len() + 8).sum::<usize>();
        let mut offset = header_len as u64;
        for (key, e) in &self.entries {
            table.extend_from_slice(&(key.len() as u32).to_le_bytes());
            table.extend_from_slice(key.as_bytes());
            table.extend_from_slice(&e.dtype.code().to_le_bytes());
            table.extend_from_slice(&(e.shape.len() as u32).to_le_bytes());
            for &d in &e.shape {
                table.extend_from_slice(&(d as u32).to_le_bytes());
            }
            table.extend_from_slice(&offset.to_le_bytes());
            offset += e.bytes.len() as u64;
        }
        let mut out = Vec::with_capacity(offset as usize);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        out.extend_from_slice(&table);
        for e in self.entries.values() {
            out.extend_from_slice(&e.bytes);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> std::result::Result<Self, String> {
        let mut pos = 0usize;
        let mut take = |n: usize| -> std::result::Result<&[u8], String> {
            let s =
                bytes.get(pos..pos + n).ok_or_else(|| format!("truncated at byte {pos} (needed {n} more bytes)"))?;
            pos += n;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err("bad magic at byte 0 (expected DAFT)".into());
        }
        let u32_of = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes"));
        let version = u32_of(take(4)?);
        if version != VERSION {
            return Err(format!("unsupported version {version} at byte 4"));
        }
        let count = u32_of(take(4)?) as usize;
        let mut table = Vec::with_capacity(count);
        for _ in 0..count {
            let klen = u32_of(take(4)?) as usize;
            let key = String::from_utf8(take(klen)?.to_vec()).map_err(|_| "entry key is not UTF-8".to_string())?;
            let code = u32_of(take(4)?);
            let dtype = DType::from_code(code).ok_or_else(|| format!("unknown dtype code {code} for {key:?}"))?;
            let rank = u32_of(take(4)?) as usize;
            let shape =
                (0..rank).map(|_| take(4).map(|b| u32_of(b) as usize)).collect::<std::result::Result<Vec<_>, _>>()?;
            let offset = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize;
            table.push((key, dtype, shape, offset));
        }
        let mut entries = BTreeMap::new();
        for (key, dtype, shape, offset) in table {
            let len = shape.iter().product::<usize>() * dtype.size();
            let payload = bytes
                .get(offset..offset + len)
                .ok_or_else(|| format!("payload of {key:?} at byte {offset} runs past end of file"))?;
            entries.insert(key, CacheEntry { dtype, shape, bytes: payload.to_vec() });
        }
        Ok(FeatureCache { entries })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => {
                Error::MissingArtifact(format!("missing feature cache {} (run `extract` first)", path.display()))
            }
            _ => Error::io(path, e),
        })?;
        FeatureCache::decode(&bytes).map_err(|m| Error::Ingestion(format!("{}: {m}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut c = FeatureCache::default();
        c.put_f64("x/b", vec![3], &[0.1, -2.5e-300, f64::MAX]);
        c.put_f64("x/a", vec![2, 1], &[1.0 / 3.0, -0.0]);
        let bytes = c.encode();
        assert_eq!(&bytes[..4], b"DAFT");
        let back = FeatureCache::decode(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.encode(), bytes);
        let v = back.get_f64("x/a").unwrap();
        assert_eq!(v[0].to_bits(), (1.0f64 / 3.0).to_bits());
        assert_eq!(v[1].to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn truncation_is_reported() {
        let mut c = FeatureCache::default();
        c.put_f64("k", vec![4], &[1.0, 2.0, 3.0, 4.0]);
        let bytes = c.encode();
        assert!(FeatureCache::decode(&bytes[..bytes.len() - 1]).unwrap_err().contains("past end"));
        assert!(FeatureCache::decode(b"DAFX").is_err());
    }
}
