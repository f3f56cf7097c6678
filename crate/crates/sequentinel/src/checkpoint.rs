//! Self-describing checkpoint files.
//!
//! Layout:
//!
//! ```text
//! bytes 0..8    magic "SEQMDL01"
//! bytes 8..16   header length N (u64, little-endian)
//! bytes 16..16+N  JSON header (UTF-8)
//! rest          tensor payload: raw f64 little-endian values,
//!               concatenated in header order
//! ```
//!
//! The header carries the model config, the full vocabulary name list
//! (UNK and PAD last), and one entry per named tensor with its shape and
//! byte range into the payload. Writing the same model twice produces
//! byte-identical files.

use crate::data::Vocabulary;
use crate::error::{Error, Result};
use crate::models::{ModelConfig, ModelParams, SequenceModel};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"SEQMDL01";

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    config: ModelConfig,
    vocabulary: Vec<String>,
    tensors: Vec<TensorMeta>,
}

#[derive(Serialize, Deserialize)]
struct TensorMeta {
    name: String,
    shape: Vec<usize>,
    /// Byte offset into the payload.
    offset: u64,
    /// Payload bytes (8 per element).
    len: u64,
}

/// Writes the model and its vocabulary to `path`.
pub fn save(path: &Path, model: &SequenceModel, vocab: &Vocabulary) -> Result<()> {
    if vocab.size() != model.cfg.vocab_size {
        return Err(Error::Checkpoint(format!(
            "vocabulary size {} does not match config vocab_size {}",
            vocab.size(),
            model.cfg.vocab_size
        )));
    }
    let named = model.params.named();
    let mut tensors = Vec::with_capacity(named.len());
    let mut offset = 0u64;
    for (name, t) in &named {
        let len = (t.numel() * 8) as u64;
        tensors.push(TensorMeta {
            name: name.clone(),
            shape: t.shape().to_vec(),
            offset,
            len,
        });
        offset += len;
    }
    let header = Header {
        format_version: 1,
        config: model.cfg.clone(),
        vocabulary: vocab.full_names().to_vec(),
        tensors,
    };
    let header_json = serde_json::to_vec(&header)?;

    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(MAGIC)?;
    file.write_all(&(header_json.len() as u64).to_le_bytes())?;
    file.write_all(&header_json)?;
    for (_, t) in &named {
        for v in t.data() {
            file.write_all(&v.to_le_bytes())?;
        }
    }
    file.flush()?;
    Ok(())
}

/// Loads a checkpoint, validating the magic, version, tensor layout, and
/// vocabulary/config consistency.
pub fn load(path: &Path) -> Result<(SequenceModel, Vocabulary)> {
    let mut file = std::io::BufReader::new(
        std::fs::File::open(path)
            .map_err(|e| Error::Checkpoint(format!("cannot open {}: {e}", path.display())))?,
    );
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint("file too short for magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?}; not a checkpoint file",
            String::from_utf8_lossy(&magic)
        )));
    }
    let mut len_bytes = [0u8; 8];
    file.read_exact(&mut len_bytes)
        .map_err(|_| Error::Checkpoint("file too short for header length".into()))?;
    let header_len = u64::from_le_bytes(len_bytes) as usize;
    let mut header_json = vec![0u8; header_len];
    file.read_exact(&mut header_json)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    let header: Header = serde_json::from_slice(&header_json)
        .map_err(|e| Error::Checkpoint(format!("malformed header: {e}")))?;
    if header.format_version != 1 {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {}",
            header.format_version
        )));
    }

    let vocab = Vocabulary::from_full_names(header.vocabulary)?;
    if vocab.size() != header.config.vocab_size {
        return Err(Error::Checkpoint(format!(
            "vocabulary has {} entries but config says {}",
            vocab.size(),
            header.config.vocab_size
        )));
    }

    let mut payload = Vec::new();
    file.read_to_end(&mut payload)?;

    // Rebuild the parameter structure from the config, then overwrite every
    // tensor from the payload; names and shapes must match exactly.
    let mut params = ModelParams::init(&header.config)?;
    let expected: Vec<String> = params.named().iter().map(|(n, _)| n.clone()).collect();
    let got: Vec<String> = header.tensors.iter().map(|t| t.name.clone()).collect();
    if expected != got {
        return Err(Error::Checkpoint(format!(
            "tensor set mismatch: expected {expected:?}, found {got:?}"
        )));
    }
    for (meta, tensor) in header.tensors.iter().zip(params.tensors_mut()) {
        if meta.shape != tensor.shape() {
            return Err(Error::Checkpoint(format!(
                "tensor {} has shape {:?}, expected {:?}",
                meta.name,
                meta.shape,
                tensor.shape()
            )));
        }
        let start = meta.offset as usize;
        let end = start + meta.len as usize;
        if end > payload.len() || meta.len as usize != tensor.numel() * 8 {
            return Err(Error::Checkpoint(format!(
                "tensor {} payload range {start}..{end} out of bounds",
                meta.name
            )));
        }
        for (i, chunk) in payload[start..end].chunks_exact(8).enumerate() {
            tensor.data_mut()[i] = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        }
    }

    Ok((
        SequenceModel {
            cfg: header.config,
            params,
        },
        vocab,
    ))
}
