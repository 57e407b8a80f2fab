//! Versioned binary checkpoints.
//!
//! Layout (all integers little-endian u32):
//!
//! ```text
//! "CXCK" version
//! len + JSON architecture descriptor
//! len + JSON training configuration
//! tensor count, then per tensor: element count + f32 LE values
//! ```
//!
//! Parameters are stored as 32-bit floats, so a reloaded model matches the
//! trained one to f32 precision.

use std::fs;
use std::path::Path;

use super::{Model, ModelConfig, TrainConfig};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CXCK";
const VERSION: u32 = 1;

pub fn encode_checkpoint(model: &Model, tc: &TrainConfig) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for json in [
        serde_json::to_vec(model.arch()).expect("arch serializes"),
        serde_json::to_vec(tc).expect("train config serializes"),
    ] {
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
    }
    out.extend_from_slice(&(model.params().len() as u32).to_le_bytes());
    for t in model.params() {
        out.extend_from_slice(&(t.len() as u32).to_le_bytes());
        for &v in t {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Serialization("checkpoint truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(Model, TrainConfig)> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(Error::Serialization("not a checkpoint".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Serialization(format!("unsupported checkpoint version {version}")));
    }
    let json_err = |e: serde_json::Error| Error::Serialization(e.to_string());
    let n = c.u32()? as usize;
    let arch: ModelConfig = serde_json::from_slice(c.take(n)?).map_err(json_err)?;
    let n = c.u32()? as usize;
    let tc: TrainConfig = serde_json::from_slice(c.take(n)?).map_err(json_err)?;
    let count = c.u32()? as usize;
    let mut params = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let len = c.u32()? as usize;
        let raw = c.take(len.checked_mul(4).ok_or_else(|| Error::Serialization("tensor too large".into()))?)?;
        params.push(
            raw.chunks_exact(4)
                .map(|b| f64::from(f32::from_le_bytes(b.try_into().unwrap())))
                .collect(),
        );
    }
    if c.pos != bytes.len() {
        return Err(Error::Serialization("trailing bytes after checkpoint".into()));
    }
    Ok((Model::from_parts(arch, params)?, tc))
}

pub fn save_checkpoint(model: &Model, tc: &TrainConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(model, tc)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Model, TrainConfig)> {
    let path = path.as_ref();
    decode_checkpoint(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
