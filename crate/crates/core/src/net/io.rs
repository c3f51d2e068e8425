//! Model file format.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! bytes 0..8    magic "FBNETMDL"
//! bytes 8..12   format version (u32, currently 1)
//! bytes 12..16  header length H (u32)
//! bytes 16..16+H  JSON header: input_dim, init seed, ordered layer specs
//! ...           weight payload: per dense layer, the weight matrix
//!               row-major as f64 then the bias vector as f64
//! last 32       SHA-256 checksum of every preceding byte
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LayerSpec, NetworkModel};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"FBNETMDL";
const FORMAT_VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 32;

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    input_dim: usize,
    seed: u64,
    layers: Vec<LayerSpec>,
}

/// Serialize a model. `load_model(save_model(m))` reproduces the
/// architecture and bit-identical weights.
pub fn save_model(model: &NetworkModel, path: &Path) -> Result<()> {
    let header = ModelHeader {
        input_dim: model.input_dim(),
        seed: model.seed(),
        layers: model.layer_specs(),
    };
    let header_json =
        serde_json::to_vec(&header).map_err(|e| Error::ModelFormat(e.to_string()))?;

    let mut bytes = Vec::new();
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&header_json);
    for dense in model.dense_layers() {
        for &w in dense.weights.as_slice().expect("standard layout") {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        for &b in dense.biases.as_slice().expect("standard layout") {
            bytes.extend_from_slice(&b.to_le_bytes());
        }
    }
    let checksum = Sha256::digest(&bytes);
    bytes.extend_from_slice(&checksum);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Load a model file, verifying magic, version, and checksum. When
/// `expected_input_dim` is given, a mismatching stored input width is an
/// error.
pub fn load_model(path: &Path, expected_input_dim: Option<usize>) -> Result<NetworkModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < MAGIC.len() + 8 + CHECKSUM_LEN {
        return Err(Error::ModelFormat("file too short".into()));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::ModelFormat("bad magic; not a model file".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let (body, stored_checksum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    let checksum = Sha256::digest(body);
    if checksum.as_slice() != stored_checksum {
        return Err(Error::ModelFormat("checksum mismatch; file corrupted".into()));
    }

    let header_len = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    let header_end = 16usize
        .checked_add(header_len)
        .filter(|&end| end <= body.len())
        .ok_or_else(|| Error::ModelFormat("truncated header".into()))?;
    let header: ModelHeader = serde_json::from_slice(&body[16..header_end])
        .map_err(|e| Error::ModelFormat(format!("bad header: {e}")))?;
    if let Some(expected) = expected_input_dim {
        if header.input_dim != expected {
            return Err(Error::ModelFormat(format!(
                "model expects input_dim {}, caller expects {expected}",
                header.input_dim
            )));
        }
    }

    let mut model = NetworkModel::new(header.input_dim, &header.layers, header.seed)?;
    let mut cursor = header_end;
    let read_f64 = |cursor: &mut usize| -> Result<f64> {
        let end = *cursor + 8;
        if end > body.len() {
            return Err(Error::ModelFormat("truncated weight payload".into()));
        }
        let v = f64::from_le_bytes(body[*cursor..end].try_into().expect("8 bytes"));
        *cursor = end;
        Ok(v)
    };
    for dense in model.dense_layers_mut() {
        for w in dense.weights.as_slice_mut().expect("standard layout") {
            *w = read_f64(&mut cursor)?;
        }
        for b in dense.biases.as_slice_mut().expect("standard layout") {
            *b = read_f64(&mut cursor)?;
        }
    }
    if cursor != body.len() {
        return Err(Error::ModelFormat(format!(
            "trailing bytes: payload ends at {cursor}, body is {}",
            body.len()
        )));
    }
    Ok(model)
}
