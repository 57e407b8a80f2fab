//! On-disk cache of materialized variants.
//!
//! Layout: `<root>/<operator hash>/<variant>/<sample id>.cimg`. Each file is
//! `CXIM`, a little-endian u32 version, u32 width, u32 height, then
//! little-endian f32 intensities. Writes go to a temporary file in the
//! destination directory and are renamed into place, so concurrent writers
//! never expose partial files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::Variant;
use crate::error::{Error, Result};
use crate::imaging::Image;

const MAGIC: &[u8; 4] = b"CXIM";
const VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct VariantCache {
    dir: PathBuf,
}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "sample id `{id}` is not usable as a file name"
        )))
    }
}

impl VariantCache {
    pub fn new(root: impl AsRef<Path>, operator_hash: &str) -> Self {
        Self {
            dir: root.as_ref().join(operator_hash),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, id: &str, v: Variant) -> Result<PathBuf> {
        check_id(id)?;
        Ok(self.dir.join(v.name()).join(format!("{id}.cimg")))
    }

    pub fn contains(&self, id: &str, v: Variant) -> Result<bool> {
        Ok(self.path(id, v)?.is_file())
    }

    pub fn get(&self, id: &str, v: Variant) -> Result<Option<Image>> {
        let path = self.path(id, v)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        };
        decode(&bytes)
            .map(Some)
            .map_err(|reason| Error::ImageFormat { path, reason })
    }

    pub fn put(&self, id: &str, v: Variant, img: &Image) -> Result<()> {
        let path = self.path(id, v)?;
        let parent = path.parent().expect("cache path has a parent");
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        write_atomic(&path, &encode(img))
    }
}

/// Writes via a sibling temporary file and an atomic rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| Error::io(parent, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn encode(img: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * img.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(img.width() as u32).to_le_bytes());
    out.extend_from_slice(&(img.height() as u32).to_le_bytes());
    for v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn decode(bytes: &[u8]) -> std::result::Result<Image, String> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err("not a cache image".into());
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    if u32_at(4) != VERSION {
        return Err(format!("unsupported cache version {}", u32_at(4)));
    }
    let (w, h) = (u32_at(8) as usize, u32_at(12) as usize);
    let body = &bytes[16..];
    if body.len() != 4 * w * h {
        return Err("cache image truncated".into());
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Image::new(w, h, data).map_err(|e| e.to_string())
}
