//! Model checkpoint file.
//!
//! A checkpoint is a single JSON document holding the layer list, the class
//! count, every parameter tensor with its shape, and the training-data mean
//! the model expects to be subtracted from raw features. Numbers round-trip
//! exactly (shortest-representation decimal), and serialization order is
//! fixed, so saving the same model twice produces byte-identical files.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::ModelParams;
use crate::tensor::Tensor;

const FORMAT: &str = "pairembed-model";
const VERSION: u32 = 1;

/// A trained model plus the normalization mean it was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    format: String,
    version: u32,
    pub params: ModelParams,
    /// Per-feature mean subtracted from raw inputs before the forward pass.
    pub mean: Tensor,
}

impl Checkpoint {
    pub fn new(params: ModelParams, mean: Tensor) -> Result<Self> {
        if mean.len() != params.in_dim() {
            return Err(Error::Dimension(format!(
                "mean of length {} for a model with input width {}",
                mean.len(),
                params.in_dim()
            )));
        }
        Ok(Self {
            format: FORMAT.into(),
            version: VERSION,
            params,
            mean,
        })
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(w, self)
            .map_err(|e| Error::Checkpoint(format!("serialize failed: {e}")))
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let r = BufReader::new(File::open(path)?);
        let ckpt: Checkpoint =
            serde_json::from_reader(r).map_err(|e| Error::Checkpoint(format!("{e}")))?;
        if ckpt.format != FORMAT {
            return Err(Error::Checkpoint(format!(
                "unknown format '{}'",
                ckpt.format
            )));
        }
        if ckpt.version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {}",
                ckpt.version
            )));
        }
        ckpt.params.validate()?;
        if ckpt.mean.len() != ckpt.params.in_dim() {
            return Err(Error::Checkpoint(format!(
                "mean of length {} does not match input width {}",
                ckpt.mean.len(),
                ckpt.params.in_dim()
            )));
        }
        Ok(ckpt)
    }
}
