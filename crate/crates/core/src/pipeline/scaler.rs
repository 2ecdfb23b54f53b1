use serde::{Deserialize, Serialize};

use crate::nn::Matrix;
use crate::{Error, Result};

/// Per-dimension standardization `(x - mean) * scale`, fitted on training inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputScaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

const MIN_STD: f64 = 1e-6;

impl InputScaler {
    pub fn identity(dim: usize) -> Self {
        InputScaler {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    /// Constant dimensions keep scale 1 and are only centred.
    pub fn fit<'a>(inputs: impl IntoIterator<Item = &'a Matrix>, dim: usize) -> Result<Self> {
        let mut n = 0usize;
        let mut sum = vec![0.0; dim];
        let mut sq = vec![0.0; dim];
        for m in inputs {
            if m.cols() != dim {
                return Err(Error::Shape(format!("scaler expects {dim} columns, got {}", m.cols())));
            }
            for r in 0..m.rows() {
                for (j, &v) in m.row(r).iter().enumerate() {
                    sum[j] += v;
                    sq[j] += v * v;
                }
            }
            n += m.rows();
        }
        if n == 0 {
            return Ok(Self::identity(dim));
        }
        let nf = n as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
        let scale = sq
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / nf - m * m).max(0.0).sqrt();
                if sd > MIN_STD { 1.0 / sd } else { 1.0 }
            })
            .collect();
        Ok(InputScaler { mean, scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, m: &mut Matrix) -> Result<()> {
        if m.cols() != self.dim() {
            return Err(Error::Shape(format!("scaler expects {} columns, got {}", self.dim(), m.cols())));
        }
        for r in 0..m.rows() {
            for ((v, mu), s) in m.row_mut(r).iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - mu) * s;
            }
        }
        Ok(())
    }

    pub fn check(&self) -> Result<()> {
        if self.mean.len() != self.scale.len() || !self.mean.iter().chain(&self.scale).all(|v| v.is_finite()) {
            return Err(Error::Checkpoint("input scaler is malformed".into()));
        }
        Ok(())
    }
}
