//! Byte encoding of named f64 tensors.
//!
//! Layout: magic `b"LWT1"`, `u32` tensor count, then per tensor a `u32` name
//! length, UTF-8 name, `u64` element count and little-endian f64 values.
//! Encoding is canonical, so decode followed by encode reproduces the input
//! bytes exactly.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{bail, Result};

const MAGIC: &[u8; 4] = b"LWT1";

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub values: Vec<f64>,
}

impl NamedTensor {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            values,
        }
    }
}

pub fn encode(tensors: &[NamedTensor]) -> Vec<u8> {
    let total: usize = tensors
        .iter()
        .map(|t| 12 + t.name.len() + 8 * t.values.len())
        .sum();
    let mut out = Vec::with_capacity(8 + total);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in tensors {
        out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
        out.extend_from_slice(t.name.as_bytes());
        out.extend_from_slice(&(t.values.len() as u64).to_le_bytes());
        for v in &t.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.at < n {
            bail!(Load, "weight payload truncated at byte {}", self.at);
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Vec<NamedTensor>> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(4)? != MAGIC {
        bail!(Load, "bad weight payload magic");
    }
    let count = r.u32()? as usize;
    let mut out = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let name_len = r.u32()? as usize;
        let name = core::str::from_utf8(r.take(name_len)?)
            .map_err(|_| crate::Error::Load("tensor name is not UTF-8".into()))?
            .to_string();
        let len = r.u64()? as usize;
        if len > (bytes.len() - r.at) / 8 {
            bail!(Load, "tensor {name} claims {len} values past end of payload");
        }
        let values = r
            .take(8 * len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        out.push(NamedTensor { name, values });
    }
    if r.at != bytes.len() {
        bail!(Load, "{} trailing bytes after weight payload", bytes.len() - r.at);
    }
    Ok(out)
}

/// Finds a tensor by name and checks its length.
pub fn take_tensor(tensors: &mut Vec<NamedTensor>, name: &str, len: usize) -> Result<Vec<f64>> {
    let Some(pos) = tensors.iter().position(|t| t.name == name) else {
        bail!(Load, "missing tensor {name}");
    };
    let t = tensors.swap_remove(pos);
    if t.values.len() != len {
        bail!(Load, "tensor {name} has {} values, expected {len}", t.values.len());
    }
    Ok(t.values)
}
