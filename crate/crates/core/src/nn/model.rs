use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bilstm::{bilstm_forward, BiLstmLabeler, BILSTM_TENSORS};
use super::matrix::Matrix;
use super::mlp::{Mlp, MLP_TENSORS};
use crate::{Error, Label, ProbDist10, Result};

/// Architecture tag stored in checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    BiLstm,
    Mlp,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::BiLstm => "bilstm",
            Architecture::Mlp => "mlp",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bilstm" => Ok(Architecture::BiLstm),
            "mlp" => Ok(Architecture::Mlp),
            other => Err(Error::Checkpoint(format!("unknown architecture {other:?}"))),
        }
    }
}

/// A trainable per-row classifier. Each input row is one token (or region) and
/// gets one distribution; the loss is summed token cross-entropy.
pub trait Model: Clone {
    fn architecture(&self) -> Architecture;
    fn tensor_names(&self) -> &'static [&'static str];
    fn tensors(&self) -> Vec<&Matrix>;
    fn tensors_mut(&mut self) -> Vec<&mut Matrix>;
    /// Rebuilds a model from tensors listed in [`Model::tensor_names`] order.
    fn from_tensors(tensors: Vec<Matrix>) -> Result<Self>;
    fn predict(&self, inputs: &Matrix) -> Result<Vec<ProbDist10>>;
    /// Adds gradients of the summed token loss into `grads` and returns that loss.
    fn accumulate_gradients(&self, inputs: &Matrix, gold: &[Label], grads: &mut Self) -> Result<f64>;

    fn zeros_like(&self) -> Self {
        let t = self.tensors().into_iter().map(Matrix::zeros_like).collect();
        Self::from_tensors(t).expect("shapes come from a valid model")
    }

    fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.data().len()).sum()
    }
}

impl Model for BiLstmLabeler {
    fn architecture(&self) -> Architecture {
        Architecture::BiLstm
    }

    fn tensor_names(&self) -> &'static [&'static str] {
        &BILSTM_TENSORS
    }

    fn tensors(&self) -> Vec<&Matrix> {
        BiLstmLabeler::tensors(self)
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        BiLstmLabeler::tensors_mut(self)
    }

    fn from_tensors(tensors: Vec<Matrix>) -> Result<Self> {
        BiLstmLabeler::from_tensor_list(tensors)
    }

    fn predict(&self, inputs: &Matrix) -> Result<Vec<ProbDist10>> {
        Ok(bilstm_forward(self, inputs)?.probs)
    }

    fn accumulate_gradients(&self, inputs: &Matrix, gold: &[Label], grads: &mut Self) -> Result<f64> {
        self.accumulate(inputs, gold, grads)
    }
}

impl Model for Mlp {
    fn architecture(&self) -> Architecture {
        Architecture::Mlp
    }

    fn tensor_names(&self) -> &'static [&'static str] {
        &MLP_TENSORS
    }

    fn tensors(&self) -> Vec<&Matrix> {
        Mlp::tensors(self)
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        Mlp::tensors_mut(self)
    }

    fn from_tensors(tensors: Vec<Matrix>) -> Result<Self> {
        Mlp::from_tensor_list(tensors)
    }

    fn predict(&self, inputs: &Matrix) -> Result<Vec<ProbDist10>> {
        (0..inputs.rows()).map(|r| self.forward(inputs.row(r))).collect()
    }

    fn accumulate_gradients(&self, inputs: &Matrix, gold: &[Label], grads: &mut Self) -> Result<f64> {
        self.accumulate(inputs, gold, grads)
    }
}
