use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::lstm::{lstm_sequence_backward, lstm_sequence_forward, LstmParams, StepCache};
use crate::rng::SeededRng;
use crate::tensor::Tensor;

/// Two independent LSTMs; one reads the sequence left to right, the other right to left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiLstmLayer {
    pub forward_params: LstmParams,
    pub backward_params: LstmParams,
}

#[derive(Debug, Clone)]
pub struct BiLstmCache {
    pub forward: Vec<StepCache>,
    /// Caches of the backward direction, in the order it ran (reversed time).
    pub backward: Vec<StepCache>,
}

impl BiLstmLayer {
    pub fn new(forward_params: LstmParams, backward_params: LstmParams) -> Result<Self> {
        forward_params.validate()?;
        backward_params.validate()?;
        if forward_params.w_f.shape() != backward_params.w_f.shape() {
            return Err(Error::dim(
                "bilstm directions",
                forward_params.w_f.shape(),
                backward_params.w_f.shape(),
            ));
        }
        Ok(BiLstmLayer {
            forward_params,
            backward_params,
        })
    }

    pub fn init(cell_size: usize, input_size: usize, rng: &mut SeededRng) -> Result<Self> {
        let f = LstmParams::init(cell_size, input_size, rng)?;
        let b = LstmParams::init(cell_size, input_size, rng)?;
        BiLstmLayer::new(f, b)
    }

    pub fn cell_size(&self) -> usize {
        self.forward_params.cell_size()
    }

    pub fn input_size(&self) -> usize {
        self.forward_params.input_size()
    }

    pub fn forward_cached(&self, xs: &[Tensor]) -> Result<(Tensor, BiLstmCache)> {
        if xs.is_empty() {
            return Err(Error::Empty("bilstm input sequence"));
        }
        let (fwd_state, fwd_caches) = lstm_sequence_forward(&self.forward_params, xs)?;
        let reversed: Vec<Tensor> = xs.iter().rev().cloned().collect();
        let (bwd_state, bwd_caches) = lstm_sequence_forward(&self.backward_params, &reversed)?;
        let out = fwd_state.h.concat_rows(&bwd_state.h)?;
        Ok((
            out,
            BiLstmCache {
                forward: fwd_caches,
                backward: bwd_caches,
            },
        ))
    }

    /// Gradients for both directions plus `∂L/∂x_t` in original time order.
    pub fn backward(&self, cache: &BiLstmCache, d_out: &Tensor) -> Result<(LstmParams, LstmParams, Vec<Tensor>)> {
        let cell = self.cell_size();
        if d_out.rows() != 2 * cell {
            return Err(Error::dim("bilstm backward", (2 * cell, d_out.cols()), d_out.shape()));
        }
        let d_fwd = d_out.slice_rows(0, cell);
        let d_bwd = d_out.slice_rows(cell, 2 * cell);
        let (g_fwd, mut dxs) = lstm_sequence_backward(&self.forward_params, &cache.forward, &d_fwd)?;
        let (g_bwd, dxs_rev) = lstm_sequence_backward(&self.backward_params, &cache.backward, &d_bwd)?;
        for (dx, dr) in dxs.iter_mut().zip(dxs_rev.iter().rev()) {
            dx.add_assign(dr)?;
        }
        Ok((g_fwd, g_bwd, dxs))
    }
}

/// Concatenated final hidden states `[h_fwd; h_bwd]`, shape `(2·cell_size, batch)`.
pub fn bilstm_forward(layer: &BiLstmLayer, xs: &[Tensor]) -> Result<Tensor> {
    layer.forward_cached(xs).map(|(out, _)| out)
}
