//! Dense 64-bit neural building blocks with hand-written backpropagation.
//!
//! Everything the three trainable models need lives here: the LSTM cell and the
//! bidirectional labeler, a small feed-forward classifier, softmax cross-entropy,
//! SGD/Adam, the token-batched training loop, checkpoints and finite-difference
//! gradient checking.

mod bilstm;
mod checkpoint;
mod gradcheck;
mod loss;
mod lstm;
mod matrix;
mod mlp;
mod model;
mod optim;
mod train;

pub use bilstm::{bilstm_forward, BiLstmLabeler, BiLstmOutput};
pub use checkpoint::{ModelCheckpoint, MAGIC as CHECKPOINT_MAGIC, VERSION as CHECKPOINT_VERSION};
pub use gradcheck::{
    analytic_gradients, grad_check, grad_check_with, gradcheck_suite, mean_loss, numeric_gradient, GradcheckCase,
    GRADCHECK_EPS, GRADCHECK_FLOOR, GRADCHECK_TOLERANCE,
};
pub use loss::{cross_entropy, softmax, token_loss, LOSS_FLOOR};
pub use lstm::{lstm_cell_forward, Gate, LstmCell};
pub use matrix::Matrix;
pub use mlp::Mlp;
pub use model::{Architecture, Model};
pub use optim::{Optimizer, OptimizerKind, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use train::{mean_token_loss, train, train_with, Sample, StepRecord, TrainConfig};
