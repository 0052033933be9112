//! Binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic     8 bytes  "UDRINFL\0"
//! version   u32      1
//! header    u32 length + JSON {chars, inventory, config}
//! blocks    u32 count, then per block:
//!           u32 name length, name, u32 rows, u32 cols, rows*cols f64
//! ```
//!
//! Floats are stored as raw bits, so a round trip is exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{ModelConfig, Params, BLOCK_NAMES};
use super::{CharVocab, Seq2SeqModel};

const MAGIC: &[u8; 8] = b"UDRINFL\0";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a reinflection checkpoint")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("truncated checkpoint")]
    Truncated,
    #[error("trailing bytes after the last block")]
    TrailingBytes,
    #[error("bad header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("block {index}: expected {expected} ({rows}x{cols}), found {found}")]
    Block {
        index: usize,
        expected: String,
        found: String,
        rows: usize,
        cols: usize,
    },
}

#[derive(Serialize, Deserialize)]
struct Header {
    chars: Vec<char>,
    inventory: Vec<String>,
    config: ModelConfig,
}

pub(super) fn write(model: &Seq2SeqModel) -> Vec<u8> {
    let header = Header {
        chars: model.vocab.chars().to_vec(),
        inventory: model.inventory.clone(),
        config: model.config,
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + json.len() + model.params.num_scalars() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    let blocks = model.params.blocks();
    out.extend_from_slice(&(blocks.len() as u32).to_le_bytes());
    for (name, m) in BLOCK_NAMES.iter().zip(blocks) {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(m.rows as u32).to_le_bytes());
        out.extend_from_slice(&(m.cols as u32).to_le_bytes());
        for v in &m.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.buf.len() < n {
            return Err(CheckpointError::Truncated);
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u32(&mut self) -> Result<usize, CheckpointError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()) as usize)
    }
}

pub(super) fn read(bytes: &[u8]) -> Result<Seq2SeqModel, CheckpointError> {
    let mut r = Reader { buf: bytes };
    if r.take(8).map_err(|_| CheckpointError::BadMagic)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()? as u32;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let hlen = r.u32()?;
    let header: Header = serde_json::from_slice(r.take(hlen)?)?;
    let vocab = CharVocab::new(header.chars);
    let mut params = Params::zeros(vocab.len(), header.inventory.len(), &header.config);
    let count = r.u32()?;
    if count != BLOCK_NAMES.len() {
        return Err(CheckpointError::Block {
            index: count,
            expected: format!("{} blocks", BLOCK_NAMES.len()),
            found: format!("{} blocks", count),
            rows: 0,
            cols: 0,
        });
    }
    for (index, (name, m)) in BLOCK_NAMES.iter().zip(params.blocks_mut()).enumerate() {
        let nlen = r.u32()?;
        let found = String::from_utf8_lossy(r.take(nlen)?).into_owned();
        let rows = r.u32()?;
        let cols = r.u32()?;
        if found != *name || rows != m.rows || cols != m.cols {
            return Err(CheckpointError::Block {
                index,
                expected: name.to_string(),
                found,
                rows,
                cols,
            });
        }
        let raw = r.take(rows * cols * 8)?;
        for (v, chunk) in m.data.iter_mut().zip(raw.chunks_exact(8)) {
            *v = f64::from_le_bytes(chunk.try_into().unwrap());
        }
    }
    if !r.buf.is_empty() {
        return Err(CheckpointError::TrailingBytes);
    }
    Ok(Seq2SeqModel {
        vocab,
        inventory: header.inventory,
        config: header.config,
        params,
    })
}
