use super::tensor::{gemm, matmul_nn, matmul_nt, matmul_tn_acc, Tensor};
use crate::error::{mismatch, Error, Result};

/// Single LSTM layer. Gate blocks are stacked row-wise in the order
/// input, forget, cell candidate, output: `w` is `4H x D`, `u` is `4H x H`,
/// `b` has length `4H`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCell {
    pub w: Tensor,
    pub u: Tensor,
    pub b: Tensor,
}

/// Hidden and cell states after each step `s = 1..=S`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmStates {
    pub hidden: Vec<Vec<f64>>,
    pub cell: Vec<Vec<f64>>,
}

impl LstmStates {
    pub fn final_hidden(&self) -> &[f64] {
        self.hidden.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Per-step activations kept for backpropagation through time.
pub(crate) struct LstmCache {
    batch: usize,
    steps: usize,
    /// `steps x batch x 4H`, activated gate values.
    gates: Vec<f64>,
    /// `(steps + 1) x batch x H`, including the zero initial state.
    cell: Vec<f64>,
    hidden: Vec<f64>,
    /// `steps x batch x H`.
    tanh_cell: Vec<f64>,
}

impl LstmCache {
    pub(crate) fn final_hidden(&self, hidden_dim: usize) -> &[f64] {
        let n = self.batch * hidden_dim;
        &self.hidden[self.steps * n..(self.steps + 1) * n]
    }
}

impl LstmCell {
    pub fn new(w: Tensor, u: Tensor, b: Tensor) -> Result<Self> {
        let ok = w.shape.len() == 2
            && u.shape.len() == 2
            && b.shape.len() == 1
            && w.shape[0].is_multiple_of(4)
            && w.shape[0] > 0
            && u.shape == [w.shape[0], w.shape[0] / 4]
            && b.shape[0] == w.shape[0];
        if !ok {
            return Err(mismatch(format!(
                "lstm shapes w {:?}, u {:?}, b {:?}",
                w.shape, u.shape, b.shape
            )));
        }
        if !(w.is_finite() && u.is_finite() && b.is_finite()) {
            return Err(Error::Config("lstm has non-finite parameters".into()));
        }
        Ok(Self { w, u, b })
    }

    pub fn input_dim(&self) -> usize {
        self.w.shape[1]
    }

    pub fn hidden_dim(&self) -> usize {
        self.u.shape[1]
    }

    /// Runs `steps` rows of each sample; `x` is `batch x steps x D` row-major.
    pub(crate) fn forward_batch(&self, x: &[f64], batch: usize, steps: usize) -> LstmCache {
        let (d, h) = (self.input_dim(), self.hidden_dim());
        let g4 = 4 * h;
        let bh = batch * h;
        let mut gates = vec![0.0; steps * batch * g4];
        let mut cell = vec![0.0; (steps + 1) * bh];
        let mut hidden = vec![0.0; (steps + 1) * bh];
        let mut tanh_cell = vec![0.0; steps * bh];
        for s in 0..steps {
            let z = &mut gates[s * batch * g4..(s + 1) * batch * g4];
            for row in z.chunks_exact_mut(g4) {
                row.copy_from_slice(&self.b.data);
            }
            gemm(batch, d, g4, (&x[s * d..], steps * d, 1), (&self.w.data, 1, d), 1.0, (z, g4, 1));
            let (h_done, h_rest) = hidden.split_at_mut((s + 1) * bh);
            let h_prev = &h_done[s * bh..];
            if s > 0 {
                matmul_nt(h_prev, &self.u.data, batch, h, g4, 1.0, z);
            }
            let (c_done, c_rest) = cell.split_at_mut((s + 1) * bh);
            let c_prev = &c_done[s * bh..];
            let c_next = &mut c_rest[..bh];
            let h_next = &mut h_rest[..bh];
            let tc = &mut tanh_cell[s * bh..(s + 1) * bh];
            for r in 0..batch {
                let zr = &mut z[r * g4..(r + 1) * g4];
                for j in 0..h {
                    let i_g = sigmoid(zr[j]);
                    let f_g = sigmoid(zr[h + j]);
                    let g_g = zr[2 * h + j].tanh();
                    let o_g = sigmoid(zr[3 * h + j]);
                    zr[j] = i_g;
                    zr[h + j] = f_g;
                    zr[2 * h + j] = g_g;
                    zr[3 * h + j] = o_g;
                    let k = r * h + j;
                    let c = f_g * c_prev[k] + i_g * g_g;
                    let t = c.tanh();
                    c_next[k] = c;
                    tc[k] = t;
                    h_next[k] = o_g * t;
                }
            }
        }
        LstmCache { batch, steps, gates, cell, hidden, tanh_cell }
    }

    /// Backpropagation through time from the gradient of the final hidden
    /// state. Accumulates into `gw`, `gu`, `gb`.
    pub(crate) fn backward_batch(
        &self,
        x: &[f64],
        cache: &LstmCache,
        dh_final: &[f64],
        gw: &mut [f64],
        gu: &mut [f64],
        gb: &mut [f64],
    ) {
        let (d, h) = (self.input_dim(), self.hidden_dim());
        let (batch, steps) = (cache.batch, cache.steps);
        let g4 = 4 * h;
        let bh = batch * h;
        let mut dh = dh_final.to_vec();
        let mut dc = vec![0.0; bh];
        let mut dz = vec![0.0; batch * g4];
        for s in (0..steps).rev() {
            let gates = &cache.gates[s * batch * g4..(s + 1) * batch * g4];
            let c_prev = &cache.cell[s * bh..(s + 1) * bh];
            let tc = &cache.tanh_cell[s * bh..(s + 1) * bh];
            for r in 0..batch {
                let gr = &gates[r * g4..(r + 1) * g4];
                let dzr = &mut dz[r * g4..(r + 1) * g4];
                for j in 0..h {
                    let k = r * h + j;
                    let (i_g, f_g, g_g, o_g) = (gr[j], gr[h + j], gr[2 * h + j], gr[3 * h + j]);
                    let t = tc[k];
                    let d_o = dh[k] * t;
                    let dck = dc[k] + dh[k] * o_g * (1.0 - t * t);
                    dzr[j] = dck * g_g * i_g * (1.0 - i_g);
                    dzr[h + j] = dck * c_prev[k] * f_g * (1.0 - f_g);
                    dzr[2 * h + j] = dck * i_g * (1.0 - g_g * g_g);
                    dzr[3 * h + j] = d_o * o_g * (1.0 - o_g);
                    dc[k] = dck * f_g;
                }
            }
            for row in dz.chunks_exact(g4) {
                for (acc, g) in gb.iter_mut().zip(row) {
                    *acc += g;
                }
            }
            gemm(g4, batch, d, (&dz, 1, g4), (&x[s * d..], steps * d, 1), 1.0, (gw, d, 1));
            if s > 0 {
                let h_prev = &cache.hidden[s * bh..(s + 1) * bh];
                matmul_tn_acc(&dz, h_prev, batch, g4, h, gu);
                matmul_nn(&dz, &self.u.data, batch, g4, h, 0.0, &mut dh);
            }
        }
    }
}

/// Runs one sequence (`S x input_dim`, row-major) from zero initial state.
pub fn lstm_forward(cell: &LstmCell, sequence: &[f64]) -> Result<LstmStates> {
    let d = cell.input_dim();
    if sequence.is_empty() || !sequence.len().is_multiple_of(d) {
        return Err(mismatch(format!(
            "sequence of {} values is not a whole number of {d}-wide rows",
            sequence.len()
        )));
    }
    let steps = sequence.len() / d;
    let h = cell.hidden_dim();
    let cache = cell.forward_batch(sequence, 1, steps);
    let rows = |v: &[f64]| v.chunks_exact(h).skip(1).map(<[f64]>::to_vec).collect();
    Ok(LstmStates { hidden: rows(&cache.hidden), cell: rows(&cache.cell) })
}
