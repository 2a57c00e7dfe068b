//! Binary checkpoint: 8-byte magic, a little-endian u64 header length, a JSON
//! header, then every parameter tensor as little-endian f32 in manifest order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, ModelDims};
use super::network::Model;
use super::params::Params;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"C2TCKPT1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Byte offset into the data section.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    config: ModelConfig,
    dims: ModelDims,
    vocab_hash: String,
    meta: serde_json::Value,
    params: Vec<TensorEntry>,
}

/// A loaded checkpoint: the model plus what was stored alongside it.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: Model,
    pub vocab_hash: String,
    pub meta: serde_json::Value,
}

pub fn checkpoint_bytes(model: &Model, vocab_hash: &str, meta: &serde_json::Value) -> Vec<u8> {
    let mut entries = Vec::new();
    let mut data = Vec::new();
    for (name, t) in model.params.named() {
        entries.push(TensorEntry { name, shape: t.shape().to_vec(), offset: data.len() });
        for &x in t.iter() {
            data.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    let header = Header {
        format_version: FORMAT_VERSION,
        config: model.config.clone(),
        dims: model.dims,
        vocab_hash: vocab_hash.to_string(),
        meta: meta.clone(),
        params: entries,
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + json.len() + data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&data);
    out
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    model: &Model,
    vocab_hash: &str,
    meta: &serde_json::Value,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, checkpoint_bytes(model, vocab_hash, meta)).map_err(|e| Error::io(path, e))
}

pub fn parse_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(8)]).into_owned();
        return Err(Error::CheckpointVersion {
            expected: String::from_utf8_lossy(MAGIC).into_owned(),
            found,
        });
    }
    let truncated = || Error::Checkpoint("file is truncated".into());
    let len_bytes: [u8; 8] = bytes.get(8..16).ok_or_else(truncated)?.try_into().expect("8 bytes");
    let header_len = usize::try_from(u64::from_le_bytes(len_bytes)).map_err(|_| truncated())?;
    let header_end = 16usize.checked_add(header_len).ok_or_else(truncated)?;
    let header_bytes = bytes.get(16..header_end).ok_or_else(truncated)?;
    let header: Header = serde_json::from_slice(header_bytes)
        .map_err(|e| Error::Checkpoint(format!("unreadable header: {e}")))?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::CheckpointVersion {
            expected: format!("format {FORMAT_VERSION}"),
            found: format!("format {}", header.format_version),
        });
    }
    header.config.validate()?;
    let data = &bytes[header_end..];
    let mut params = Params::init(&header.config, &header.dims, 0);
    let names: Vec<(String, Vec<usize>)> =
        params.named().into_iter().map(|(n, t)| (n, t.shape().to_vec())).collect();
    if names.len() != header.params.len() {
        return Err(Error::Checkpoint(format!(
            "manifest lists {} tensors, configuration implies {}",
            header.params.len(),
            names.len()
        )));
    }
    let mut expected_end = 0;
    for ((tensor, (name, shape)), entry) in params.tensors_mut().into_iter().zip(&names).zip(&header.params) {
        if entry.name != *name || entry.shape != *shape {
            return Err(Error::Checkpoint(format!(
                "manifest entry {} {:?} does not match {} {:?}",
                entry.name, entry.shape, name, shape
            )));
        }
        let end = entry.offset + 4 * tensor.len();
        let chunk = data.get(entry.offset..end).ok_or_else(truncated)?;
        for (x, b) in tensor.iter_mut().zip(chunk.chunks_exact(4)) {
            *x = f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64;
        }
        expected_end = expected_end.max(end);
    }
    if data.len() != expected_end {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after parameter data",
            data.len() - expected_end
        )));
    }
    if !params.all_finite() {
        return Err(Error::Checkpoint("non-finite parameter values".into()));
    }
    Ok(Checkpoint {
        model: Model { config: header.config, dims: header.dims, params },
        vocab_hash: header.vocab_hash,
        meta: header.meta,
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&bytes)
}
