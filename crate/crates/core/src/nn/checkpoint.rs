//! Binary model container.
//!
//! Layout, all integers unsigned 32-bit little-endian:
//!
//! ```text
//! "DAMC" | version | dtype code | record count
//! record: kind code | attr count | attrs (f64 LE) | tensor count | tensors
//! tensor: rank | dims… | raw little-endian IEEE-754 payload
//! ```
//!
//! The first record (kind 0) carries the per-sample input shape as attrs.

use std::path::Path;

use super::activation::{Dropout, Relu};
use super::conv::{Conv2d, Padding};
use super::dense::Dense;
use super::norm::{BatchNorm, Standardize};
use super::pool::{GlobalAvgPool, MaxPool2d};
use super::{DType, Layer, Scalar, Sequential, Tensor};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DAMC";
pub const VERSION: u32 = 1;

const KIND_INPUT: u32 = 0;
const KIND_CONV: u32 = 1;
const KIND_MAXPOOL: u32 = 2;
const KIND_BATCHNORM: u32 = 3;
const KIND_DENSE: u32 = 4;
const KIND_RELU: u32 = 5;
const KIND_DROPOUT: u32 = 6;
const KIND_GAP: u32 = 7;
const KIND_STANDARDIZE: u32 = 8;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_record<T: Scalar>(out: &mut Vec<u8>, kind: u32, attrs: &[f64], tensors: &[&Tensor<T>]) {
    put_u32(out, kind);
    put_u32(out, attrs.len() as u32);
    for a in attrs {
        out.extend_from_slice(&a.to_le_bytes());
    }
    put_u32(out, tensors.len() as u32);
    for t in tensors {
        put_u32(out, t.rank() as u32);
        for &d in t.shape() {
            put_u32(out, d as u32);
        }
        for &v in t.data() {
            v.write_le(out);
        }
    }
}

pub fn encode<T: Scalar>(net: &Sequential<T>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, T::DTYPE.code());
    put_u32(&mut out, net.layers().len() as u32 + 1);
    let input: Vec<f64> = net.input_shape().iter().map(|&d| d as f64).collect();
    put_record::<T>(&mut out, KIND_INPUT, &input, &[]);
    for layer in net.layers() {
        match layer {
            Layer::Conv2d(c) => {
                let pad = match c.padding() {
                    Padding::Valid => 0.0,
                    Padding::Same => 1.0,
                };
                put_record(&mut out, KIND_CONV, &[c.stride() as f64, pad], &[c.kernel(), c.bias()]);
            }
            Layer::MaxPool2d(p) => {
                put_record::<T>(&mut out, KIND_MAXPOOL, &[p.window() as f64, p.stride() as f64], &[])
            }
            Layer::BatchNorm(b) => put_record(
                &mut out,
                KIND_BATCHNORM,
                &[b.momentum(), b.epsilon()],
                &[&b.gamma, &b.beta, &b.running_mean, &b.running_var],
            ),
            Layer::Dense(d) => put_record(&mut out, KIND_DENSE, &[], &[&d.weights, &d.bias]),
            Layer::Relu(_) => put_record::<T>(&mut out, KIND_RELU, &[], &[]),
            Layer::Dropout(d) => put_record::<T>(&mut out, KIND_DROPOUT, &[d.rate()], &[]),
            Layer::GlobalAvgPool(_) => put_record::<T>(&mut out, KIND_GAP, &[], &[]),
            Layer::Standardize(s) => put_record(&mut out, KIND_STANDARDIZE, &[], &[&s.mean, &s.std]),
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Ingestion(format!("checkpoint truncated at byte {} (needed {n} more bytes)", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn tensor<T: Scalar>(&mut self) -> Result<Tensor<T>> {
        let at = self.pos;
        let rank = self.u32()? as usize;
        if rank > 8 {
            return Err(Error::Ingestion(format!("implausible tensor rank {rank} at byte {at}")));
        }
        let dims = (0..rank).map(|_| self.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let n: usize = dims.iter().product();
        let size = T::DTYPE.size();
        let raw = self.take(n * size)?;
        let data = raw.chunks_exact(size).map(T::read_le).collect();
        Tensor::new(dims, data).map_err(|e| Error::Ingestion(format!("tensor at byte {at}: {e}")))
    }
}

/// Element type stored in a checkpoint, read from its header.
pub fn peek_dtype(bytes: &[u8]) -> Result<DType> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Ingestion("not a DAMC checkpoint (bad magic at byte 0)".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Ingestion(format!("unsupported checkpoint version {version}")));
    }
    let code = r.u32()?;
    DType::from_code(code).ok_or_else(|| Error::Ingestion(format!("unknown dtype code {code} at byte 8")))
}

pub fn decode<T: Scalar>(bytes: &[u8]) -> Result<Sequential<T>> {
    let dtype = peek_dtype(bytes)?;
    if dtype != T::DTYPE {
        return Err(Error::Usage(format!("checkpoint holds {dtype:?} values, caller asked for {:?}", T::DTYPE)));
    }
    let mut r = Reader { bytes, pos: 12 };
    let count = r.u32()? as usize;
    let mut input_shape = None;
    let mut layers = Vec::with_capacity(count.saturating_sub(1));
    for _ in 0..count {
        let at = r.pos;
        let kind = r.u32()?;
        let n_attrs = r.u32()? as usize;
        let attrs = (0..n_attrs).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let n_tensors = r.u32()? as usize;
        let mut tensors = (0..n_tensors).map(|_| r.tensor::<T>()).collect::<Result<Vec<_>>>()?;
        let bad = |what: &str| Error::Ingestion(format!("malformed {what} record at byte {at}"));
        let want = |a: usize, t: usize| -> Result<()> {
            if attrs.len() == a && tensors.len() == t {
                Ok(())
            } else {
                Err(Error::Ingestion(format!("record kind {kind} at byte {at} has wrong arity")))
            }
        };
        let layer = match kind {
            KIND_INPUT => {
                want(attrs.len(), 0)?;
                input_shape = Some(attrs.iter().map(|&d| d as usize).collect::<Vec<_>>());
                continue;
            }
            KIND_CONV => {
                want(2, 2)?;
                let pad = if attrs[1] == 0.0 { Padding::Valid } else { Padding::Same };
                let bias = tensors.pop().expect("arity checked");
                let kernel = tensors.pop().expect("arity checked");
                Layer::Conv2d(Conv2d::from_parts(kernel, bias, attrs[0] as usize, pad).map_err(|_| bad("conv"))?)
            }
            KIND_MAXPOOL => {
                want(2, 0)?;
                Layer::MaxPool2d(MaxPool2d::new(attrs[0] as usize, attrs[1] as usize).map_err(|_| bad("maxpool"))?)
            }
            KIND_BATCHNORM => {
                want(2, 4)?;
                let mut it = tensors.into_iter();
                let (g, b, m, v) = (
                    it.next().expect("arity"),
                    it.next().expect("arity"),
                    it.next().expect("arity"),
                    it.next().expect("arity"),
                );
                Layer::BatchNorm(BatchNorm::from_parts(g, b, m, v, attrs[0], attrs[1]).map_err(|_| bad("batchnorm"))?)
            }
            KIND_DENSE => {
                want(0, 2)?;
                let bias = tensors.pop().expect("arity checked");
                let w = tensors.pop().expect("arity checked");
                Layer::Dense(Dense::from_parts(w, bias).map_err(|_| bad("dense"))?)
            }
            KIND_RELU => {
                want(0, 0)?;
                Layer::Relu(Relu::new())
            }
            KIND_DROPOUT => {
                want(1, 0)?;
                Layer::Dropout(Dropout::new(attrs[0]).map_err(|_| bad("dropout"))?)
            }
            KIND_GAP => {
                want(0, 0)?;
                Layer::GlobalAvgPool(GlobalAvgPool::new())
            }
            KIND_STANDARDIZE => {
                want(0, 2)?;
                let std = tensors.pop().expect("arity checked");
                let mean = tensors.pop().expect("arity checked");
                Layer::Standardize(Standardize::from_parts(mean, std).map_err(|_| bad("standardize"))?)
            }
            other => return Err(Error::Ingestion(format!("unknown layer kind {other} at byte {at}"))),
        };
        layers.push(layer);
    }
    if r.pos != bytes.len() {
        return Err(Error::Ingestion(format!("trailing bytes after checkpoint end at byte {}", r.pos)));
    }
    let input_shape = input_shape.ok_or_else(|| Error::Ingestion("checkpoint has no input record".into()))?;
    Sequential::new(input_shape, layers).map_err(|e| Error::Ingestion(format!("checkpoint layers do not compose: {e}")))
}

pub fn save<T: Scalar>(net: &Sequential<T>, path: &Path) -> Result<()> {
    std::fs::write(path, encode(net)).map_err(|e| Error::io(path, e))
}

pub fn load<T: Scalar>(path: &Path) -> Result<Sequential<T>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Ingestion(m) => Error::Ingestion(format!("{}: {m}", path.display())),
        other => other,
    })
}
