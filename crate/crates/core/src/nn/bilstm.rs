use rand::Rng;

use super::loss::{score_gradient, softmax, token_loss};
use super::lstm::LstmCell;
use super::matrix::{axpy, Matrix};
use crate::{Error, Label, ProbDist10, Result, NUM_CLASSES};

/// Bidirectional LSTM followed by a linear layer and softmax over the ten classes.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmLabeler {
    pub forward: LstmCell,
    pub backward: LstmCell,
    /// `C x 2H`; columns `0..H` read the forward state.
    pub head_w: Matrix,
    pub head_b: Matrix,
}

#[derive(Debug, Clone)]
pub struct BiLstmOutput {
    /// `T x 2H`, row t = `[forward h_t ; backward h_t]`.
    pub hidden: Matrix,
    pub probs: Vec<ProbDist10>,
}

pub(crate) const BILSTM_TENSORS: [&str; 8] = [
    "forward.w_x",
    "forward.w_h",
    "forward.bias",
    "backward.w_x",
    "backward.w_h",
    "backward.bias",
    "head.w",
    "head.b",
];

impl BiLstmLabeler {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        BiLstmLabeler {
            forward: LstmCell::zeros(input_dim, hidden),
            backward: LstmCell::zeros(input_dim, hidden),
            head_w: Matrix::zeros(NUM_CLASSES, 2 * hidden),
            head_b: Matrix::zeros(1, NUM_CLASSES),
        }
    }

    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let forward = LstmCell::init(input_dim, hidden, rng);
        let backward = LstmCell::init(input_dim, hidden, rng);
        let bound = 1.0 / ((2 * hidden) as f64).sqrt();
        BiLstmLabeler {
            forward,
            backward,
            head_w: Matrix::uniform(NUM_CLASSES, 2 * hidden, bound, rng),
            head_b: Matrix::zeros(1, NUM_CLASSES),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn hidden(&self) -> usize {
        self.forward.hidden()
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        self.forward.check_shapes()?;
        self.backward.check_shapes()?;
        let h = self.hidden();
        if self.backward.hidden() != h || self.backward.input_dim() != self.input_dim() {
            return Err(Error::Shape("forward and backward cells differ in shape".into()));
        }
        if self.head_w.shape() != (NUM_CLASSES, 2 * h) || self.head_b.shape() != (1, NUM_CLASSES) {
            return Err(Error::Shape(format!(
                "head is {:?} + {:?}, expected ({NUM_CLASSES}, {})",
                self.head_w.shape(),
                self.head_b.shape(),
                2 * h
            )));
        }
        Ok(())
    }

    fn check_input(&self, inputs: &Matrix) -> Result<()> {
        if inputs.rows() == 0 {
            return Err(Error::Length("empty sequence".into()));
        }
        if inputs.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "sequence vectors have dimension {}, model expects {}",
                inputs.cols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn tensors(&self) -> Vec<&Matrix> {
        vec![
            &self.forward.w_x,
            &self.forward.w_h,
            &self.forward.bias,
            &self.backward.w_x,
            &self.backward.w_h,
            &self.backward.bias,
            &self.head_w,
            &self.head_b,
        ]
    }

    pub(crate) fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        vec![
            &mut self.forward.w_x,
            &mut self.forward.w_h,
            &mut self.forward.bias,
            &mut self.backward.w_x,
            &mut self.backward.w_h,
            &mut self.backward.bias,
            &mut self.head_w,
            &mut self.head_b,
        ]
    }

    pub(crate) fn from_tensor_list(mut t: Vec<Matrix>) -> Result<Self> {
        if t.len() != BILSTM_TENSORS.len() {
            return Err(Error::Checkpoint(format!(
                "biLSTM needs {} tensors, got {}",
                BILSTM_TENSORS.len(),
                t.len()
            )));
        }
        let mut next = || t.remove(0);
        let forward = LstmCell {
            w_x: next(),
            w_h: next(),
            bias: next(),
        };
        let backward = LstmCell {
            w_x: next(),
            w_h: next(),
            bias: next(),
        };
        let m = BiLstmLabeler {
            forward,
            backward,
            head_w: next(),
            head_b: next(),
        };
        m.check_shapes()?;
        Ok(m)
    }

    /// Loss summed over tokens; gradients (in tensor order) are added into `grads`.
    pub(crate) fn accumulate(&self, inputs: &Matrix, gold: &[Label], grads: &mut BiLstmLabeler) -> Result<f64> {
        self.check_input(inputs)?;
        if gold.len() != inputs.rows() {
            return Err(Error::Length(format!(
                "{} tokens but {} labels",
                inputs.rows(),
                gold.len()
            )));
        }
        let n = inputs.rows();
        let h = self.hidden();
        let fwd_order: Vec<usize> = (0..n).collect();
        let bwd_order: Vec<usize> = (0..n).rev().collect();
        let fc = self.forward.run(inputs, &fwd_order);
        let bc = self.backward.run(inputs, &bwd_order);

        let mut dh_f = vec![vec![0.0; h]; n];
        let mut dh_b = vec![vec![0.0; h]; n];
        let mut loss = 0.0;
        let mut hid = vec![0.0; 2 * h];
        let mut dhid = vec![0.0; 2 * h];
        for t in 0..n {
            hid[..h].copy_from_slice(&fc[t].h);
            hid[h..].copy_from_slice(&bc[n - 1 - t].h);
            let mut scores = self.head_b.data().to_vec();
            self.head_w.matvec_add(&hid, &mut scores);
            let p = softmax(&scores);
            loss += token_loss(&p, gold[t]);
            let ds = score_gradient(&p, gold[t]);
            grads.head_w.outer_add(&ds, &hid);
            axpy(1.0, &ds, grads.head_b.data_mut());
            dhid.iter_mut().for_each(|v| *v = 0.0);
            self.head_w.matvec_t_add(&ds, &mut dhid);
            dh_f[t].copy_from_slice(&dhid[..h]);
            dh_b[n - 1 - t].copy_from_slice(&dhid[h..]);
        }
        self.forward
            .backprop(inputs, &fwd_order, &fc, &dh_f, &mut grads.forward);
        self.backward
            .backprop(inputs, &bwd_order, &bc, &dh_b, &mut grads.backward);
        Ok(loss)
    }
}

pub fn bilstm_forward(p: &BiLstmLabeler, inputs: &Matrix) -> Result<BiLstmOutput> {
    p.check_shapes()?;
    p.check_input(inputs)?;
    let n = inputs.rows();
    let h = p.hidden();
    let fc = p.forward.run(inputs, &(0..n).collect::<Vec<_>>());
    let bc = p.backward.run(inputs, &(0..n).rev().collect::<Vec<_>>());
    let mut hidden = Matrix::zeros(n, 2 * h);
    let mut probs = Vec::with_capacity(n);
    for t in 0..n {
        let row = hidden.row_mut(t);
        row[..h].copy_from_slice(&fc[t].h);
        row[h..].copy_from_slice(&bc[n - 1 - t].h);
        let mut scores = p.head_b.data().to_vec();
        p.head_w.matvec_add(hidden.row(t), &mut scores);
        probs.push(softmax(&scores));
    }
    Ok(BiLstmOutput { hidden, probs })
}
