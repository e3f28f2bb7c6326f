use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tensor::Tensor;

/// Affine classification head followed by a softmax over classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub w: Tensor,
    pub b: Tensor,
}

impl DenseParams {
    pub fn zeros(n_classes: usize, input_size: usize) -> Self {
        DenseParams {
            w: Tensor::zeros(n_classes, input_size),
            b: Tensor::zeros(n_classes, 1),
        }
    }

    pub fn init(n_classes: usize, input_size: usize, rng: &mut SeededRng) -> Self {
        let scale = 1.0 / (input_size as f64).sqrt();
        DenseParams {
            w: Tensor::init_uniform(n_classes, input_size, rng, scale),
            b: Tensor::zeros(n_classes, 1),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.w.rows()
    }

    pub fn input_size(&self) -> usize {
        self.w.cols()
    }

    pub fn logits(&self, h: &Tensor) -> Result<Tensor> {
        if h.rows() != self.input_size() {
            return Err(Error::dim("dense", self.w.shape(), h.shape()));
        }
        self.w.matmul(h)?.add_column(&self.b)
    }

    /// Returns `(dW, db, dh)` for upstream gradient `∂L/∂logits`.
    pub fn backward(&self, h: &Tensor, d_logits: &Tensor) -> Result<(DenseParams, Tensor)> {
        let grads = DenseParams {
            w: d_logits.matmul_t(h)?,
            b: d_logits.sum_columns(),
        };
        let dh = self.w.t_matmul(d_logits)?;
        Ok((grads, dh))
    }
}

/// `softmax(W·h + b)` with one probability column per input column.
pub fn dense_softmax_forward(params: &DenseParams, h: &Tensor) -> Result<Tensor> {
    Ok(params.logits(h)?.softmax_cols())
}
