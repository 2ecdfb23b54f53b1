use rand::Rng;

use super::matrix::Matrix;
use crate::{Error, Result};

/// Gate blocks of the stacked parameter matrices, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input,
    Forget,
    Output,
    Cell,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Output, Gate::Cell];

    fn block(self) -> usize {
        self as usize
    }
}

/// One LSTM cell. The four gates are stacked row-wise (`i, f, o, g`):
/// `w_x` is `4H x D_in`, `w_h` is `4H x H` and `bias` is `1 x 4H`.
///
/// ```text
/// i = σ(W_i x + U_i h + b_i)    f = σ(W_f x + U_f h + b_f)
/// o = σ(W_o x + U_o h + b_o)    g = tanh(W_g x + U_g h + b_g)
/// c' = f ⊙ c + i ⊙ g            h' = o ⊙ tanh(c')
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCell {
    pub w_x: Matrix,
    pub w_h: Matrix,
    pub bias: Matrix,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Activations of one time step, kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    /// Post-activation gates, stacked `i, f, o, g`.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

impl LstmCell {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        LstmCell {
            w_x: Matrix::zeros(4 * hidden, input_dim),
            w_h: Matrix::zeros(4 * hidden, hidden),
            bias: Matrix::zeros(1, 4 * hidden),
        }
    }

    /// Weights uniform in `±1/√H`; biases zero except the forget gate, which is 1.
    pub fn init<R: Rng>(input_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut cell = LstmCell {
            w_x: Matrix::uniform(4 * hidden, input_dim, bound, rng),
            w_h: Matrix::uniform(4 * hidden, hidden, bound, rng),
            bias: Matrix::zeros(1, 4 * hidden),
        };
        cell.gate_bias_mut(Gate::Forget).fill(1.0);
        cell
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.cols()
    }

    pub fn hidden(&self) -> usize {
        self.w_h.cols()
    }

    pub fn gate_bias(&self, gate: Gate) -> &[f64] {
        let h = self.hidden();
        &self.bias.data()[gate.block() * h..(gate.block() + 1) * h]
    }

    pub fn gate_bias_mut(&mut self, gate: Gate) -> &mut [f64] {
        let h = self.hidden();
        &mut self.bias.data_mut()[gate.block() * h..(gate.block() + 1) * h]
    }

    /// Input weight rows of one gate (`H x D_in`, row-major).
    pub fn gate_input_weights_mut(&mut self, gate: Gate) -> &mut [f64] {
        let (h, d) = (self.hidden(), self.input_dim());
        &mut self.w_x.data_mut()[gate.block() * h * d..(gate.block() + 1) * h * d]
    }

    /// Recurrent weight rows of one gate (`H x H`, row-major).
    pub fn gate_recurrent_weights_mut(&mut self, gate: Gate) -> &mut [f64] {
        let h = self.hidden();
        &mut self.w_h.data_mut()[gate.block() * h * h..(gate.block() + 1) * h * h]
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        let h = self.w_h.cols();
        if self.w_h.rows() != 4 * h || self.w_x.rows() != 4 * h || self.bias.shape() != (1, 4 * h) {
            return Err(Error::Shape(format!(
                "inconsistent LSTM cell: w_x {:?}, w_h {:?}, bias {:?}",
                self.w_x.shape(),
                self.w_h.shape(),
                self.bias.shape()
            )));
        }
        Ok(())
    }

    pub(crate) fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepCache {
        let h = self.hidden();
        let mut z = self.bias.data().to_vec();
        self.w_x.matvec_add(x, &mut z);
        self.w_h.matvec_add(h_prev, &mut z);
        for v in &mut z[..3 * h] {
            *v = sigmoid(*v);
        }
        for v in &mut z[3 * h..] {
            *v = v.tanh();
        }
        let mut c = vec![0.0; h];
        let mut tanh_c = vec![0.0; h];
        let mut hn = vec![0.0; h];
        for k in 0..h {
            let (i, f, o, g) = (z[k], z[h + k], z[2 * h + k], z[3 * h + k]);
            c[k] = f * c_prev[k] + i * g;
            tanh_c[k] = c[k].tanh();
            hn[k] = o * tanh_c[k];
        }
        StepCache {
            gates: z,
            c,
            tanh_c,
            h: hn,
        }
    }

    /// Runs the cell over `inputs` rows in `order`; caches are in processing order.
    pub(crate) fn run(&self, inputs: &Matrix, order: &[usize]) -> Vec<StepCache> {
        let h = self.hidden();
        let zeros = vec![0.0; h];
        let mut caches: Vec<StepCache> = Vec::with_capacity(order.len());
        for &t in order {
            let (hp, cp) = match caches.last() {
                Some(prev) => (&prev.h[..], &prev.c[..]),
                None => (&zeros[..], &zeros[..]),
            };
            let next = self.step(inputs.row(t), hp, cp);
            caches.push(next);
        }
        caches
    }

    /// Backpropagation through time. `dh[s]` is the loss gradient w.r.t. the hidden
    /// state at processing step `s`; parameter gradients are added into `grads`.
    pub(crate) fn backprop(
        &self,
        inputs: &Matrix,
        order: &[usize],
        caches: &[StepCache],
        dh: &[Vec<f64>],
        grads: &mut LstmCell,
    ) {
        let h = self.hidden();
        let zeros = vec![0.0; h];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        for s in (0..order.len()).rev() {
            let cache = &caches[s];
            let (h_prev, c_prev) = if s == 0 {
                (&zeros[..], &zeros[..])
            } else {
                (&caches[s - 1].h[..], &caches[s - 1].c[..])
            };
            let g = &cache.gates;
            for k in 0..h {
                let dhk = dh[s][k] + dh_next[k];
                let (i, f, o, gg) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
                let tc = cache.tanh_c[k];
                let dc = dc_next[k] + dhk * o * (1.0 - tc * tc);
                let d_o = dhk * tc;
                let d_i = dc * gg;
                let d_g = dc * i;
                let d_f = dc * c_prev[k];
                dz[k] = d_i * i * (1.0 - i);
                dz[h + k] = d_f * f * (1.0 - f);
                dz[2 * h + k] = d_o * o * (1.0 - o);
                dz[3 * h + k] = d_g * (1.0 - gg * gg);
                dc_next[k] = dc * f;
            }
            grads.w_x.outer_add(&dz, inputs.row(order[s]));
            grads.w_h.outer_add(&dz, h_prev);
            super::matrix::axpy(1.0, &dz, grads.bias.data_mut());
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            self.w_h.matvec_t_add(&dz, &mut dh_next);
        }
    }
}

/// A single step from `(h_prev, c_prev)`; returns `(h, c)`.
pub fn lstm_cell_forward(
    p: &LstmCell,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    p.check_shapes()?;
    let h = p.hidden();
    if x.len() != p.input_dim() || h_prev.len() != h || c_prev.len() != h {
        return Err(Error::Shape(format!(
            "cell {}->{} given x {}, h {}, c {}",
            p.input_dim(),
            h,
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    let s = p.step(x, h_prev, c_prev);
    Ok((s.h, s.c))
}
