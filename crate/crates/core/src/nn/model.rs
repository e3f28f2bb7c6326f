//! Sequence classifier: BiLSTM → concatenated final states → dropout → dense → softmax.

use crate::error::{Error, Result};
use crate::nn::bilstm::{BiLstmCache, BiLstmLayer};
use crate::nn::dense::DenseParams;
use crate::nn::dropout::dropout_with_mask;
use crate::nn::lstm::{LstmParams, LSTM_BLOCK_NAMES};
use crate::rng::SeededRng;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmClassifier {
    pub bilstm: BiLstmLayer,
    pub dense: DenseParams,
}

/// Forward-pass caches kept for [`BiLstmClassifier::backward`].
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub cache: BiLstmCache,
    pub features: Tensor,
    pub mask: Tensor,
    pub dropped: Tensor,
    pub probs: Tensor,
}

/// Gradients laid out like the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub forward: LstmParams,
    pub backward: LstmParams,
    pub dense: DenseParams,
}

pub fn block_names() -> Vec<String> {
    let mut names = Vec::with_capacity(18);
    for dir in ["fwd", "bwd"] {
        for n in LSTM_BLOCK_NAMES {
            names.push(format!("{dir}.{n}"));
        }
    }
    names.push("dense.W".into());
    names.push("dense.b".into());
    names
}

impl ModelGrads {
    pub fn blocks(&self) -> Vec<&Tensor> {
        let mut out: Vec<&Tensor> = Vec::with_capacity(18);
        out.extend(self.forward.blocks());
        out.extend(self.backward.blocks());
        out.push(&self.dense.w);
        out.push(&self.dense.b);
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::with_capacity(18);
        out.extend(self.forward.blocks_mut());
        out.extend(self.backward.blocks_mut());
        out.push(&mut self.dense.w);
        out.push(&mut self.dense.b);
        out
    }

    pub fn add_assign(&mut self, other: &ModelGrads) -> Result<()> {
        for (a, b) in self.blocks_mut().into_iter().zip(other.blocks()) {
            a.add_assign(b)?;
        }
        Ok(())
    }

    pub fn global_norm(&self) -> f64 {
        self.blocks().iter().map(|t| t.norm_sq()).sum::<f64>().sqrt()
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for t in self.blocks_mut() {
            for v in t.data_mut() {
                *v *= s;
            }
        }
    }
}

impl BiLstmClassifier {
    pub fn new(bilstm: BiLstmLayer, dense: DenseParams) -> Result<Self> {
        if dense.input_size() != 2 * bilstm.cell_size() || dense.b.shape() != (dense.n_classes(), 1) {
            return Err(Error::dim(
                "classifier head",
                (dense.n_classes(), 2 * bilstm.cell_size()),
                dense.w.shape(),
            ));
        }
        Ok(BiLstmClassifier { bilstm, dense })
    }

    pub fn init(input_size: usize, cell_size: usize, n_classes: usize, rng: &mut SeededRng) -> Result<Self> {
        let bilstm = BiLstmLayer::init(cell_size, input_size, rng)?;
        let dense = DenseParams::init(n_classes, 2 * cell_size, rng);
        BiLstmClassifier::new(bilstm, dense)
    }

    pub fn cell_size(&self) -> usize {
        self.bilstm.cell_size()
    }

    pub fn input_size(&self) -> usize {
        self.bilstm.input_size()
    }

    pub fn n_classes(&self) -> usize {
        self.dense.n_classes()
    }

    /// Training mode when `rng` is given (dropout active), inference otherwise.
    pub fn forward(&self, xs: &[Tensor], dropout_rate: f64, rng: Option<&mut SeededRng>) -> Result<ForwardPass> {
        let (features, cache) = self.bilstm.forward_cached(xs)?;
        let (dropped, mask) = match rng {
            Some(rng) => dropout_with_mask(&features, dropout_rate, rng, true)?,
            None => dropout_with_mask(&features, dropout_rate, &mut SeededRng::new(0), false)?,
        };
        let probs = self.dense.logits(&dropped)?.softmax_cols();
        Ok(ForwardPass {
            cache,
            features,
            mask,
            dropped,
            probs,
        })
    }

    /// Class probabilities in inference mode, one column per sequence column.
    pub fn predict_proba(&self, xs: &[Tensor]) -> Result<Tensor> {
        Ok(self.forward(xs, 0.0, None)?.probs)
    }

    /// Analytic gradients given `∂L/∂logits`; also returns `∂L/∂x_t` for every step.
    pub fn backward(&self, pass: &ForwardPass, d_logits: &Tensor) -> Result<(ModelGrads, Vec<Tensor>)> {
        if pass.cache.forward.is_empty() || pass.cache.backward.is_empty() {
            return Err(Error::Contract("forward caches missing".into()));
        }
        if d_logits.shape() != pass.probs.shape() {
            return Err(Error::dim("classifier backward", pass.probs.shape(), d_logits.shape()));
        }
        let (dense_grads, d_dropped) = self.dense.backward(&pass.dropped, d_logits)?;
        let d_features = d_dropped.hadamard(&pass.mask)?;
        let (g_fwd, g_bwd, dxs) = self.bilstm.backward(&pass.cache, &d_features)?;
        Ok((
            ModelGrads {
                forward: g_fwd,
                backward: g_bwd,
                dense: dense_grads,
            },
            dxs,
        ))
    }

    pub fn zero_grads(&self) -> ModelGrads {
        ModelGrads {
            forward: self.bilstm.forward_params.zeros_like(),
            backward: self.bilstm.backward_params.zeros_like(),
            dense: DenseParams::zeros(self.n_classes(), 2 * self.cell_size()),
        }
    }

    pub fn blocks(&self) -> Vec<&Tensor> {
        let mut out: Vec<&Tensor> = Vec::with_capacity(18);
        out.extend(self.bilstm.forward_params.blocks());
        out.extend(self.bilstm.backward_params.blocks());
        out.push(&self.dense.w);
        out.push(&self.dense.b);
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::with_capacity(18);
        out.extend(self.bilstm.forward_params.blocks_mut());
        out.extend(self.bilstm.backward_params.blocks_mut());
        out.push(&mut self.dense.w);
        out.push(&mut self.dense.b);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.blocks().iter().map(|t| t.len()).sum()
    }

    /// Rebuilds a model from blocks in [`block_names`] order.
    pub fn from_blocks(mut blocks: Vec<Tensor>) -> Result<Self> {
        if blocks.len() != 18 {
            return Err(Error::InvalidArgument(format!(
                "expected 18 parameter blocks, got {}",
                blocks.len()
            )));
        }
        let dense_b = blocks.pop().expect("len checked");
        let dense_w = blocks.pop().expect("len checked");
        let lstm = |bs: &mut std::vec::Drain<'_, Tensor>| -> LstmParams {
            LstmParams {
                w_f: bs.next().expect("len checked"),
                w_i: bs.next().expect("len checked"),
                w_c: bs.next().expect("len checked"),
                w_o: bs.next().expect("len checked"),
                b_f: bs.next().expect("len checked"),
                b_i: bs.next().expect("len checked"),
                b_c: bs.next().expect("len checked"),
                b_o: bs.next().expect("len checked"),
            }
        };
        let mut drain = blocks.drain(..);
        let fwd = lstm(&mut drain);
        let bwd = lstm(&mut drain);
        drop(drain);
        let bilstm = BiLstmLayer::new(fwd, bwd)?;
        BiLstmClassifier::new(bilstm, DenseParams { w: dense_w, b: dense_b })
    }
}
