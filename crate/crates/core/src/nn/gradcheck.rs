use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::model::{Architecture, Model};
use super::train::mean_token_loss;
use super::train::Sample;
use super::{BiLstmLabeler, Mlp};
use crate::{mix_seed, Error, Label, Result, NUM_CLASSES};

pub const GRADCHECK_EPS: f64 = 1e-5;
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;
/// Denominator floor of the relative error; central differences of a loss near 1
/// carry about 1e-11 of rounding noise, which would dominate gradients below this.
pub const GRADCHECK_FLOOR: f64 = 1e-6;

fn sample(inputs: &Matrix, gold: &[Label]) -> Result<Sample> {
    Sample::new(inputs.clone(), gold.to_vec())
}

/// Mean token cross-entropy of one sequence.
pub fn mean_loss<M: Model>(m: &M, inputs: &Matrix, gold: &[Label]) -> Result<f64> {
    if inputs.rows() == 0 {
        return Err(Error::Length("empty sequence".into()));
    }
    mean_token_loss(m, [&sample(inputs, gold)?])
}

/// Gradients of [`mean_loss`], one matrix per tensor.
pub fn analytic_gradients<M: Model>(m: &M, inputs: &Matrix, gold: &[Label]) -> Result<Vec<Matrix>> {
    if inputs.rows() == 0 {
        return Err(Error::Length("empty sequence".into()));
    }
    let mut g = m.zeros_like();
    m.accumulate_gradients(inputs, gold, &mut g)?;
    let inv = 1.0 / inputs.rows() as f64;
    Ok(g.tensors()
        .into_iter()
        .map(|t| {
            let mut t = t.clone();
            t.scale(inv);
            t
        })
        .collect())
}

/// Central difference of [`mean_loss`] in parameter `index` of tensor `tensor`.
pub fn numeric_gradient<M: Model>(
    m: &M,
    inputs: &Matrix,
    gold: &[Label],
    tensor: usize,
    index: usize,
    eps: f64,
) -> Result<f64> {
    let mut probe = m.clone();
    let orig = probe.tensors()[tensor].data()[index];
    probe.tensors_mut()[tensor].data_mut()[index] = orig + eps;
    let plus = mean_loss(&probe, inputs, gold)?;
    probe.tensors_mut()[tensor].data_mut()[index] = orig - eps;
    let minus = mean_loss(&probe, inputs, gold)?;
    Ok((plus - minus) / (2.0 * eps))
}

/// Largest relative error between analytic and central-difference gradients.
pub fn grad_check<M: Model>(m: &M, inputs: &Matrix, gold: &[Label], eps: f64) -> Result<f64> {
    let grads = analytic_gradients(m, inputs, gold)?;
    grad_check_with(m, inputs, gold, &grads, eps)
}

/// Like [`grad_check`] but compares against caller-supplied gradients.
pub fn grad_check_with<M: Model>(
    m: &M,
    inputs: &Matrix,
    gold: &[Label],
    grads: &[Matrix],
    eps: f64,
) -> Result<f64> {
    let shapes: Vec<_> = m.tensors().iter().map(|t| t.shape()).collect();
    if grads.len() != shapes.len() || grads.iter().zip(&shapes).any(|(g, s)| g.shape() != *s) {
        return Err(Error::Shape("gradients do not match the model tensors".into()));
    }
    let mut worst: f64 = 0.0;
    for (k, g) in grads.iter().enumerate() {
        for (i, &a) in g.data().iter().enumerate() {
            let n = numeric_gradient(m, inputs, gold, k, i, eps)?;
            let rel = (a - n).abs() / (a.abs() + n.abs()).max(GRADCHECK_FLOOR);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

/// One randomly drawn model of a [`gradcheck_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckCase {
    pub architecture: Architecture,
    pub input_dim: usize,
    pub hidden: usize,
    pub tokens: usize,
    pub max_rel_error: f64,
}

/// Checks `count` seeded small models (H <= 8, <= 5 tokens, D_in <= 12),
/// alternating biLSTM labelers and region classifiers.
pub fn gradcheck_suite(count: usize, seed: u64) -> Result<Vec<GradcheckCase>> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, k as u64));
            let input_dim = rng.gen_range(1..=12);
            let hidden = rng.gen_range(1..=8);
            let tokens = rng.gen_range(1..=5);
            let x = Matrix::uniform(tokens, input_dim, 1.0, &mut rng);
            let gold: Vec<Label> = (0..tokens)
                .map(|_| Label::from_index(rng.gen_range(0..NUM_CLASSES)).expect("class index"))
                .collect();
            let (architecture, max_rel_error) = if k % 2 == 0 {
                let m = BiLstmLabeler::init(input_dim, hidden, &mut rng);
                (Architecture::BiLstm, grad_check(&m, &x, &gold, GRADCHECK_EPS)?)
            } else {
                let m = Mlp::init(input_dim, hidden, &mut rng);
                (Architecture::Mlp, grad_check(&m, &x, &gold, GRADCHECK_EPS)?)
            };
            Ok(GradcheckCase {
                architecture,
                input_dim,
                hidden,
                tokens,
                max_rel_error,
            })
        })
        .collect()
}
