use rand::Rng;

use super::loss::{score_gradient, softmax, token_loss};
use super::matrix::{axpy, Matrix};
use crate::{Error, Label, ProbDist10, Result, NUM_CLASSES};

/// One tanh hidden layer followed by a linear layer and softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub w1: Matrix,
    pub b1: Matrix,
    pub w2: Matrix,
    pub b2: Matrix,
}

pub(crate) const MLP_TENSORS: [&str; 4] = ["hidden.w", "hidden.b", "out.w", "out.b"];

impl Mlp {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Mlp {
            w1: Matrix::zeros(hidden, input_dim),
            b1: Matrix::zeros(1, hidden),
            w2: Matrix::zeros(NUM_CLASSES, hidden),
            b2: Matrix::zeros(1, NUM_CLASSES),
        }
    }

    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        Mlp {
            w1: Matrix::uniform(hidden, input_dim, 1.0 / (input_dim as f64).sqrt(), rng),
            b1: Matrix::zeros(1, hidden),
            w2: Matrix::uniform(NUM_CLASSES, hidden, 1.0 / (hidden as f64).sqrt(), rng),
            b2: Matrix::zeros(1, NUM_CLASSES),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.cols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.rows()
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        let h = self.hidden();
        if self.b1.shape() != (1, h)
            || self.w2.shape() != (NUM_CLASSES, h)
            || self.b2.shape() != (1, NUM_CLASSES)
        {
            return Err(Error::Shape(format!(
                "inconsistent MLP: {:?} {:?} {:?} {:?}",
                self.w1.shape(),
                self.b1.shape(),
                self.w2.shape(),
                self.b2.shape()
            )));
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has dimension {}, classifier expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn hidden_act(&self, x: &[f64]) -> Vec<f64> {
        let mut a = self.b1.data().to_vec();
        self.w1.matvec_add(x, &mut a);
        a.iter_mut().for_each(|v| *v = v.tanh());
        a
    }

    pub fn forward(&self, x: &[f64]) -> Result<ProbDist10> {
        self.check_shapes()?;
        self.check_input(x)?;
        let a = self.hidden_act(x);
        let mut s = self.b2.data().to_vec();
        self.w2.matvec_add(&a, &mut s);
        Ok(softmax(&s))
    }

    pub(crate) fn tensors(&self) -> Vec<&Matrix> {
        vec![&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub(crate) fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        vec![&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub(crate) fn from_tensor_list(t: Vec<Matrix>) -> Result<Self> {
        let [w1, b1, w2, b2]: [Matrix; 4] = t.try_into().map_err(|t: Vec<Matrix>| {
            Error::Checkpoint(format!("MLP needs 4 tensors, got {}", t.len()))
        })?;
        let m = Mlp { w1, b1, w2, b2 };
        m.check_shapes()?;
        Ok(m)
    }

    pub(crate) fn accumulate(&self, inputs: &Matrix, gold: &[Label], grads: &mut Mlp) -> Result<f64> {
        if gold.len() != inputs.rows() {
            return Err(Error::Length(format!(
                "{} rows but {} labels",
                inputs.rows(),
                gold.len()
            )));
        }
        let mut loss = 0.0;
        let mut da = vec![0.0; self.hidden()];
        for (r, &g) in gold.iter().enumerate() {
            let x = inputs.row(r);
            self.check_input(x)?;
            let a = self.hidden_act(x);
            let mut s = self.b2.data().to_vec();
            self.w2.matvec_add(&a, &mut s);
            let p = softmax(&s);
            loss += token_loss(&p, g);
            let ds = score_gradient(&p, g);
            grads.w2.outer_add(&ds, &a);
            axpy(1.0, &ds, grads.b2.data_mut());
            da.iter_mut().for_each(|v| *v = 0.0);
            self.w2.matvec_t_add(&ds, &mut da);
            for (d, &av) in da.iter_mut().zip(&a) {
                *d *= 1.0 - av * av;
            }
            grads.w1.outer_add(&da, x);
            axpy(1.0, &da, grads.b1.data_mut());
        }
        Ok(loss)
    }
}
