//! Binary checkpoint: `MIOM`, version `u32`, header length `u32`, JSON
//! header, then every parameter as little-endian `f64` in header order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{ModelConfig, ModelParams, PARAM_NAMES};
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MIOM";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    config: ModelConfig,
    tensors: Vec<TensorEntry>,
}

pub fn to_bytes(params: &ModelParams) -> Vec<u8> {
    let header = Header {
        config: *params.config(),
        tensors: params
            .tensors()
            .iter()
            .zip(PARAM_NAMES)
            .map(|(t, name)| TensorEntry {
                name: name.to_string(),
                shape: t.shape().to_vec(),
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + json.len() + 8 * params.count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for t in params.tensors() {
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<ModelParams> {
    let bad = |m: &str| Error::BadCheckpoint(m.to_string());
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(bad("missing MIOM magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::BadCheckpoint(format!("unsupported version {version}")));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let body = &bytes[12..];
    if body.len() < hlen {
        return Err(bad("truncated header"));
    }
    let header: Header = serde_json::from_slice(&body[..hlen])?;
    let mut payload = &body[hlen..];
    let mut tensors = Vec::with_capacity(header.tensors.len());
    for entry in &header.tensors {
        let n: usize = entry.shape.iter().product();
        if payload.len() < 8 * n {
            return Err(Error::BadCheckpoint(format!("payload truncated in `{}`", entry.name)));
        }
        let (chunk, rest) = payload.split_at(8 * n);
        let data = chunk
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        tensors.push(Tensor::from_data(entry.shape.clone(), data)?);
        payload = rest;
    }
    if !payload.is_empty() {
        return Err(bad("trailing bytes after payload"));
    }
    ModelParams::from_tensors(header.config, tensors)
}

pub fn save(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    std::fs::File::create(path)?.write_all(&to_bytes(params))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<ModelParams> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let p = ModelParams::init(ModelConfig { height: 8, width: 24 }, 4, 1.0);
        let bytes = to_bytes(&p);
        assert_eq!(&bytes[..4], b"MIOM");
        assert_eq!(from_bytes(&bytes).unwrap(), p);
    }

    #[test]
    fn rejects_corruption() {
        let p = ModelParams::zeros(ModelConfig::default());
        let mut bytes = to_bytes(&p);
        assert!(from_bytes(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(matches!(from_bytes(&bytes), Err(Error::BadCheckpoint(_))));
    }
}
