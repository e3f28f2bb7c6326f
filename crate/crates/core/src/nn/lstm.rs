//! Single-direction LSTM with fused gate matrices acting on `[h_{t-1}; x_t]`:
//!
//! ```text
//! f_t  = σ(W_f·[h_{t-1}, x_t] + b_f)
//! i_t  = σ(W_i·[h_{t-1}, x_t] + b_i)
//! C̃_t = tanh(W_C·[h_{t-1}, x_t] + b_C)
//! C_t  = f_t ⊙ C_{t-1} + i_t ⊙ C̃_t
//! o_t  = σ(W_o·[h_{t-1}, x_t] + b_o)
//! h_t  = o_t ⊙ tanh(C_t)
//! ```
//!
//! States and inputs may carry several columns; each column is an
//! independent sequence in a batch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub w_f: Tensor,
    pub w_i: Tensor,
    pub w_c: Tensor,
    pub w_o: Tensor,
    pub b_f: Tensor,
    pub b_i: Tensor,
    pub b_c: Tensor,
    pub b_o: Tensor,
}

pub const LSTM_BLOCK_NAMES: [&str; 8] = ["W_f", "W_i", "W_C", "W_o", "b_f", "b_i", "b_C", "b_o"];

impl LstmParams {
    pub fn zeros(cell_size: usize, input_size: usize) -> Result<Self> {
        if cell_size == 0 || input_size == 0 {
            return Err(Error::InvalidArgument(format!(
                "cell_size and input_size must be >= 1 (got {cell_size}, {input_size})"
            )));
        }
        let w = Tensor::zeros(cell_size, cell_size + input_size);
        let b = Tensor::zeros(cell_size, 1);
        Ok(LstmParams {
            w_f: w.clone(),
            w_i: w.clone(),
            w_c: w.clone(),
            w_o: w,
            b_f: b.clone(),
            b_i: b.clone(),
            b_c: b.clone(),
            b_o: b,
        })
    }

    /// Weights uniform on ±1/√fan_in with fan_in = cell_size + input_size; biases zero.
    pub fn init(cell_size: usize, input_size: usize, rng: &mut SeededRng) -> Result<Self> {
        let mut p = LstmParams::zeros(cell_size, input_size)?;
        let scale = 1.0 / ((cell_size + input_size) as f64).sqrt();
        let cols = cell_size + input_size;
        p.w_f = Tensor::init_uniform(cell_size, cols, rng, scale);
        p.w_i = Tensor::init_uniform(cell_size, cols, rng, scale);
        p.w_c = Tensor::init_uniform(cell_size, cols, rng, scale);
        p.w_o = Tensor::init_uniform(cell_size, cols, rng, scale);
        Ok(p)
    }

    pub fn cell_size(&self) -> usize {
        self.w_f.rows()
    }

    pub fn input_size(&self) -> usize {
        self.w_f.cols() - self.w_f.rows()
    }

    pub fn zeros_like(&self) -> Self {
        LstmParams::zeros(self.cell_size(), self.input_size()).expect("shape already validated")
    }

    pub fn blocks(&self) -> [&Tensor; 8] {
        [
            &self.w_f, &self.w_i, &self.w_c, &self.w_o, &self.b_f, &self.b_i, &self.b_c, &self.b_o,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut Tensor; 8] {
        [
            &mut self.w_f,
            &mut self.w_i,
            &mut self.w_c,
            &mut self.w_o,
            &mut self.b_f,
            &mut self.b_i,
            &mut self.b_c,
            &mut self.b_o,
        ]
    }

    /// Checks the shared-shape invariants of the eight blocks.
    pub fn validate(&self) -> Result<()> {
        let ws = [&self.w_f, &self.w_i, &self.w_c, &self.w_o];
        let bs = [&self.b_f, &self.b_i, &self.b_c, &self.b_o];
        let (cell, cols) = self.w_f.shape();
        if cell == 0 || cols <= cell {
            return Err(Error::InvalidArgument(format!(
                "bad LSTM weight shape {:?}",
                (cell, cols)
            )));
        }
        for w in ws {
            if w.shape() != (cell, cols) {
                return Err(Error::dim("lstm weights", (cell, cols), w.shape()));
            }
        }
        for b in bs {
            if b.shape() != (cell, 1) {
                return Err(Error::dim("lstm biases", (cell, 1), b.shape()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub c: Tensor,
    pub h: Tensor,
}

impl LstmState {
    pub fn zeros(cell_size: usize, batch: usize) -> Self {
        LstmState {
            c: Tensor::zeros(cell_size, batch),
            h: Tensor::zeros(cell_size, batch),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateActivations {
    pub f: Tensor,
    pub i: Tensor,
    pub o: Tensor,
    pub c_tilde: Tensor,
}

/// Everything one step's backward pass needs.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub hx: Tensor,
    pub prev_c: Tensor,
    pub gates: GateActivations,
    pub tanh_c: Tensor,
}

fn gate(w: &Tensor, b: &Tensor, hx: &Tensor) -> Result<Tensor> {
    w.matmul(hx)?.add_column(b)
}

fn step(params: &LstmParams, prev: &LstmState, x_t: &Tensor) -> Result<(LstmState, StepCache)> {
    let cell = params.cell_size();
    if x_t.rows() != params.input_size() {
        return Err(Error::dim(
            "lstm input",
            (params.input_size(), prev.h.cols()),
            x_t.shape(),
        ));
    }
    if prev.h.shape() != (cell, x_t.cols()) || prev.c.shape() != (cell, x_t.cols()) {
        return Err(Error::dim("lstm state", (cell, x_t.cols()), prev.h.shape()));
    }
    let hx = prev.h.concat_rows(x_t)?;
    let f = gate(&params.w_f, &params.b_f, &hx)?.sigmoid();
    let i = gate(&params.w_i, &params.b_i, &hx)?.sigmoid();
    let c_tilde = gate(&params.w_c, &params.b_c, &hx)?.tanh_act();
    let c = f.hadamard(&prev.c)?.add(&i.hadamard(&c_tilde)?)?;
    let o = gate(&params.w_o, &params.b_o, &hx)?.sigmoid();
    let tanh_c = c.tanh_act();
    let h = o.hadamard(&tanh_c)?;
    let cache = StepCache {
        hx,
        prev_c: prev.c.clone(),
        gates: GateActivations { f, i, o, c_tilde },
        tanh_c,
    };
    Ok((LstmState { c, h }, cache))
}

pub fn lstm_cell_forward(params: &LstmParams, prev: &LstmState, x_t: &Tensor) -> Result<(LstmState, GateActivations)> {
    let (state, cache) = step(params, prev, x_t)?;
    Ok((state, cache.gates))
}

/// Runs the cell from the zero state over `xs`, keeping every step's cache.
pub fn lstm_sequence_forward(params: &LstmParams, xs: &[Tensor]) -> Result<(LstmState, Vec<StepCache>)> {
    let first = xs.first().ok_or(Error::Empty("lstm input sequence"))?;
    let mut state = LstmState::zeros(params.cell_size(), first.cols());
    let mut caches = Vec::with_capacity(xs.len());
    for x in xs {
        if x.shape() != first.shape() {
            return Err(Error::dim("lstm sequence", first.shape(), x.shape()));
        }
        let (next, cache) = step(params, &state, x)?;
        caches.push(cache);
        state = next;
    }
    Ok((state, caches))
}

/// BPTT for a loss that only reads the final hidden state.
///
/// Returns parameter gradients and `∂L/∂x_t` for every step.
pub fn lstm_sequence_backward(
    params: &LstmParams,
    caches: &[StepCache],
    d_h_final: &Tensor,
) -> Result<(LstmParams, Vec<Tensor>)> {
    if caches.is_empty() {
        return Err(Error::Contract("backward called without forward caches".into()));
    }
    let cell = params.cell_size();
    let batch = d_h_final.cols();
    if d_h_final.rows() != cell || caches[0].hx.cols() != batch {
        return Err(Error::dim(
            "lstm backward",
            (cell, caches[0].hx.cols()),
            d_h_final.shape(),
        ));
    }
    let mut grads = params.zeros_like();
    let mut dxs = vec![Tensor::zeros(0, 0); caches.len()];
    let mut dh = d_h_final.clone();
    let mut dc = Tensor::zeros(cell, batch);

    for (t, cache) in caches.iter().enumerate().rev() {
        let g = &cache.gates;
        let n = cell * batch;
        let mut dz_f = vec![0.0; n];
        let mut dz_i = vec![0.0; n];
        let mut dz_c = vec![0.0; n];
        let mut dz_o = vec![0.0; n];
        let mut dc_prev = vec![0.0; n];
        for k in 0..n {
            let (f, i, o, ct) = (g.f.data()[k], g.i.data()[k], g.o.data()[k], g.c_tilde.data()[k]);
            let tc = cache.tanh_c.data()[k];
            let dh_k = dh.data()[k];
            let d_o = dh_k * tc;
            let dc_k = dc.data()[k] + dh_k * o * (1.0 - tc * tc);
            dz_f[k] = dc_k * cache.prev_c.data()[k] * f * (1.0 - f);
            dz_i[k] = dc_k * ct * i * (1.0 - i);
            dz_c[k] = dc_k * i * (1.0 - ct * ct);
            dz_o[k] = d_o * o * (1.0 - o);
            dc_prev[k] = dc_k * f;
        }
        let dz = [
            Tensor::from_vec(cell, batch, dz_f)?,
            Tensor::from_vec(cell, batch, dz_i)?,
            Tensor::from_vec(cell, batch, dz_c)?,
            Tensor::from_vec(cell, batch, dz_o)?,
        ];
        let weights = [&params.w_f, &params.w_i, &params.w_c, &params.w_o];
        let mut d_hx = Tensor::zeros(cache.hx.rows(), batch);
        {
            let [gw_f, gw_i, gw_c, gw_o, gb_f, gb_i, gb_c, gb_o] = grads.blocks_mut();
            let gws = [gw_f, gw_i, gw_c, gw_o];
            let gbs = [gb_f, gb_i, gb_c, gb_o];
            for (((dz_g, w), gw), gb) in dz.iter().zip(weights).zip(gws).zip(gbs) {
                gw.add_assign(&dz_g.matmul_t(&cache.hx)?)?;
                gb.add_assign(&dz_g.sum_columns())?;
                d_hx.add_assign(&w.t_matmul(dz_g)?)?;
            }
        }
        dh = d_hx.slice_rows(0, cell);
        dxs[t] = d_hx.slice_rows(cell, d_hx.rows());
        dc = Tensor::from_vec(cell, batch, dc_prev)?;
    }
    Ok((grads, dxs))
}
