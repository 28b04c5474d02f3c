// SPDX-License-Identifier: MIT OR Apache-2.0

//! CPAK binary pack reader and writer.
//!
//! Layout (little-endian, no padding):
//!
//! ```text
//! "CPAK" | u32 version=1 | u32 k | u64 N | u64 D | u32 L
//! k × ( u32 name_len | name | N·D f32 row-major )
//! L × ( u32 name_len | name | N bytes ∈ {0,1} )
//! u64 meta_len | UTF-8 JSON object of string → string
//! ```
//!
//! Activations are stored as `f32`. Values loaded from a pack are exactly
//! representable, so a load/save cycle reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{ActivationMatrix, ContrastSet};
use crate::error::{Error, Result};

pub const PACK_MAGIC: &[u8; 4] = b"CPAK";
pub const PACK_VERSION: u32 = 1;

pub fn load_pack(path: impl AsRef<Path>) -> Result<ContrastSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_pack(&bytes)
}

pub fn save_pack(set: &ContrastSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_pack(set)).map_err(|e| Error::io(path, e))
}

/// Serializes a set to CPAK bytes.
pub fn write_pack(set: &ContrastSet) -> Vec<u8> {
    let (n, d) = (set.n_rows(), set.dim());
    let mut out = Vec::with_capacity(32 + set.n_variants() * (n * d * 4 + 16));
    out.extend_from_slice(PACK_MAGIC);
    out.extend_from_slice(&PACK_VERSION.to_le_bytes());
    out.extend_from_slice(&(set.n_variants() as u32).to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    out.extend_from_slice(&(set.labels().len() as u32).to_le_bytes());
    for (name, m) in set.variants() {
        put_name(&mut out, name);
        for v in m.to_row_major() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    for (name, track) in set.labels() {
        put_name(&mut out, name);
        out.extend(track.iter().map(|&b| u8::from(b)));
    }
    if set.meta().is_empty() {
        out.extend_from_slice(&0u64.to_le_bytes());
    } else {
        let json = serde_json::to_vec(set.meta()).expect("string map serializes");
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
    }
    out
}

/// Parses CPAK bytes into a validated set.
pub fn read_pack(bytes: &[u8]) -> Result<ContrastSet> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4).map_err(|_| Error::Format("file shorter than the magic".into()))?;
    if magic != PACK_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected \"CPAK\"")));
    }
    let version = r.u32()?;
    if version != PACK_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {version}, expected {PACK_VERSION}"
        )));
    }
    let k = r.u32()? as usize;
    let n = r.u64()?;
    let d = r.u64()?;
    let l = r.u32()? as usize;
    let cells = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(4))
        .filter(|&bytes| bytes <= r.remaining() as u64)
        .ok_or_else(|| {
            Error::Corrupt(format!(
                "header declares {n}x{d} per variant, more than the {} bytes remaining",
                r.remaining()
            ))
        })? as usize
        / 4;
    let (n, d) = (n as usize, d as usize);

    let mut variants = Vec::with_capacity(k);
    for _ in 0..k {
        let name = r.name()?;
        let raw = r.take(cells * 4)?;
        let mut values = Vec::with_capacity(cells);
        for (i, chunk) in raw.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes(chunk.try_into().expect("chunk of 4"));
            if !v.is_finite() {
                return Err(Error::Validation(format!(
                    "variant `{name}` has a non-finite value at row {}, column {}",
                    i / d,
                    i % d
                )));
            }
            values.push(f64::from(v));
        }
        variants.push((name, ActivationMatrix::from_row_major(n, d, &values)?));
    }

    let mut labels = Vec::with_capacity(l);
    for _ in 0..l {
        let name = r.name()?;
        let raw = r.take(n)?;
        let track = raw
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Validation(format!(
                    "label track `{name}` contains byte {other}, expected 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        labels.push((name, track));
    }

    let meta_len = r.u64()?;
    if meta_len > r.remaining() as u64 {
        return Err(Error::Corrupt(format!(
            "metadata length {meta_len} exceeds the {} bytes remaining",
            r.remaining()
        )));
    }
    let meta_bytes = r.take(meta_len as usize)?;
    let meta: BTreeMap<String, String> = if meta_bytes.is_empty() {
        BTreeMap::new()
    } else {
        serde_json::from_slice(meta_bytes)
            .map_err(|e| Error::Corrupt(format!("metadata is not a string map: {e}")))?
    };
    if r.remaining() != 0 {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes after metadata",
            r.remaining()
        )));
    }
    ContrastSet::new(variants, labels, meta)
}

fn put_name(out: &mut Vec<u8>, name: &str) {
    out.extend_from_slice(&(name.len() as u32).to_le_bytes());
    out.extend_from_slice(name.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if len > self.remaining() {
            return Err(Error::Corrupt(format!(
                "truncated payload: needed {len} bytes at offset {}, {} left",
                self.pos,
                self.remaining()
            )));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn name(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec())
            .map_err(|_| Error::Corrupt(format!("name at offset {} is not UTF-8", self.pos - len)))
    }
}
