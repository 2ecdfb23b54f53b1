//! Binary checkpoint container.
//!
//! ```text
//! offset  size  content
//! 0       8     magic "MMXCKPT1"
//! 8       4     format version, u32 little-endian (currently 1)
//! 12      4     header length N in bytes, u32 little-endian
//! 16      N     UTF-8 JSON header
//! 16+N    ...   tensor payload: every tensor's values in header order,
//!               row-major, f64 little-endian
//! ```
//!
//! The header holds `architecture`, `config` (the full training config),
//! `history` (one record per step), `extra` (string map) and `tensors`, a list of
//! `{name, rows, cols}` describing the payload.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::model::{Architecture, Model};
use super::train::{StepRecord, TrainConfig};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"MMXCKPT1";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub architecture: Architecture,
    pub tensors: Vec<(String, Matrix)>,
    pub config: TrainConfig,
    pub history: Vec<StepRecord>,
    /// Free-form metadata, e.g. embedding parameters needed at inference.
    pub extra: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct TensorInfo {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    architecture: Architecture,
    config: TrainConfig,
    history: Vec<StepRecord>,
    extra: BTreeMap<String, String>,
    tensors: Vec<TensorInfo>,
}

impl ModelCheckpoint {
    pub fn from_model<M: Model>(model: &M, config: TrainConfig, history: Vec<StepRecord>) -> Self {
        let tensors = model
            .tensor_names()
            .iter()
            .zip(model.tensors())
            .map(|(n, t)| (n.to_string(), t.clone()))
            .collect();
        ModelCheckpoint {
            architecture: model.architecture(),
            tensors,
            config,
            history,
            extra: BTreeMap::new(),
        }
    }

    pub fn to_model<M: Model>(&self) -> Result<M> {
        let m = M::from_tensors(self.tensors.iter().map(|(_, t)| t.clone()).collect())?;
        if m.architecture() != self.architecture {
            return Err(Error::Checkpoint(format!(
                "checkpoint holds a {} model, expected {}",
                self.architecture,
                m.architecture()
            )));
        }
        for ((name, _), want) in self.tensors.iter().zip(m.tensor_names()) {
            if name != want {
                return Err(Error::Checkpoint(format!("tensor {name:?} where {want:?} was expected")));
            }
        }
        Ok(m)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            architecture: self.architecture,
            config: self.config.clone(),
            history: self.history.clone(),
            extra: self.extra.clone(),
            tensors: self
                .tensors
                .iter()
                .map(|(n, t)| TensorInfo {
                    name: n.clone(),
                    rows: t.rows(),
                    cols: t.cols(),
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header)?;
        let len = u32::try_from(json.len()).map_err(|_| Error::Checkpoint("header too large".into()))?;
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(&json)?;
        let mut buf = Vec::new();
        for (_, t) in &self.tensors {
            buf.clear();
            buf.reserve(t.data().len() * 8);
            for v in t.data() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|e| Error::Checkpoint(format!("truncated file: {e}")))?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)
            .map_err(|e| Error::Checkpoint(format!("truncated file: {e}")))?;
        let version = u32::from_le_bytes(word);
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        r.read_exact(&mut word)
            .map_err(|e| Error::Checkpoint(format!("truncated file: {e}")))?;
        let mut json = vec![0u8; u32::from_le_bytes(word) as usize];
        r.read_exact(&mut json)
            .map_err(|e| Error::Checkpoint(format!("truncated header: {e}")))?;
        let header: Header = serde_json::from_slice(&json)
            .map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for info in header.tensors {
            let n = info
                .rows
                .checked_mul(info.cols)
                .ok_or_else(|| Error::Checkpoint(format!("tensor {} too large", info.name)))?;
            let mut bytes = vec![0u8; n * 8];
            r.read_exact(&mut bytes)
                .map_err(|e| Error::Checkpoint(format!("truncated tensor {}: {e}", info.name)))?;
            let data = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            tensors.push((info.name, Matrix::from_vec(info.rows, info.cols, data)?));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Checkpoint("trailing bytes after payload".into()));
        }
        Ok(ModelCheckpoint {
            architecture: header.architecture,
            tensors,
            config: header.config,
            history: header.history,
            extra: header.extra,
        })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Checkpoint(msg) => Error::Checkpoint(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}
