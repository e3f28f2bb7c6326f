//! Central-difference gradient verification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nn::dense::DenseParams;
use crate::nn::loss::batch_cross_entropy;
use crate::nn::model::{block_names, BiLstmClassifier};
use crate::tensor::Tensor;

/// Below this magnitude both gradients are treated as zero for the relative error.
const REL_FLOOR: f64 = 1e-8;

/// Mean softmax cross-entropy of `(n_classes, batch)` logits over named
/// parameter blocks, with an analytic gradient.
pub trait GradCheckable {
    fn block_names(&self) -> Vec<String>;
    fn block_mut(&mut self, index: usize) -> &mut Tensor;
    fn logits(&self) -> Result<Tensor>;
    fn targets(&self) -> &[usize];
    fn analytic_gradients(&self) -> Result<Vec<Tensor>>;

    fn loss(&self) -> Result<f64> {
        Ok(batch_cross_entropy(&self.logits()?.softmax_cols(), self.targets())?.0)
    }
}

/// `L(up) - L(down)` for mean cross-entropy, computed from the logit shifts
/// so the O(1) loss values never get subtracted. Per column,
/// `L = ln Σ_k exp(z_k - z_t)`, so the difference is
/// `ln1p(Σ_k w_k expm1(δ_k))` with `w` the softmax of `down` and
/// `δ_k = (up_k - down_k) - (up_t - down_t)`.
pub fn cross_entropy_delta(up: &Tensor, down: &Tensor, targets: &[usize]) -> Result<f64> {
    if up.shape() != down.shape() || targets.len() != up.cols() {
        return Err(Error::dim("cross_entropy_delta", up.shape(), down.shape()));
    }
    let mut total = 0.0;
    for (b, &t) in targets.iter().enumerate() {
        if t >= up.rows() {
            return Err(Error::InvalidArgument(format!("target {t} out of range")));
        }
        let max = (0..down.rows())
            .map(|k| down.get(k, b))
            .fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = (0..down.rows()).map(|k| (down.get(k, b) - max).exp()).sum();
        let shift_t = up.get(t, b) - down.get(t, b);
        let s: f64 = (0..down.rows())
            .map(|k| {
                let w = (down.get(k, b) - max).exp() / norm;
                w * ((up.get(k, b) - down.get(k, b)) - shift_t).exp_m1()
            })
            .sum();
        total += s.ln_1p();
    }
    Ok(total / targets.len() as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockCheck {
    pub name: String,
    pub entries: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub eps: f64,
    pub tolerance: f64,
    pub blocks: Vec<BlockCheck>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error() < self.tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

pub fn grad_check<P: GradCheckable>(problem: &mut P, eps: f64, tolerance: f64) -> Result<GradCheckReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be > 0 (got {eps})"
        )));
    }
    let analytic = problem.analytic_gradients()?;
    let names = problem.block_names();
    if analytic.len() != names.len() {
        return Err(Error::Contract(format!(
            "{} gradient blocks for {} parameter blocks",
            analytic.len(),
            names.len()
        )));
    }
    let mut blocks = Vec::with_capacity(names.len());
    for (b, name) in names.into_iter().enumerate() {
        let n = problem.block_mut(b).len();
        if analytic[b].len() != n {
            return Err(Error::dim(
                "grad_check",
                analytic[b].shape(),
                problem.block_mut(b).shape(),
            ));
        }
        let mut max_rel: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        for j in 0..n {
            let orig = problem.block_mut(b).data()[j];
            problem.block_mut(b).data_mut()[j] = orig + eps;
            let up = problem.logits()?;
            problem.block_mut(b).data_mut()[j] = orig - eps;
            let down = problem.logits()?;
            problem.block_mut(b).data_mut()[j] = orig;
            let numeric = cross_entropy_delta(&up, &down, problem.targets())? / (2.0 * eps);
            let a = analytic[b].data()[j];
            max_rel = max_rel.max(relative_error(a, numeric));
            max_abs = max_abs.max((a - numeric).abs());
        }
        blocks.push(BlockCheck {
            name,
            entries: n,
            max_rel_error: max_rel,
            max_abs_error: max_abs,
        });
    }
    Ok(GradCheckReport { eps, tolerance, blocks })
}

/// Full classifier on a fixed batch, dropout off. Inputs are checked as extra blocks.
#[derive(Debug, Clone)]
pub struct SequenceProblem {
    pub model: BiLstmClassifier,
    pub xs: Vec<Tensor>,
    pub targets: Vec<usize>,
}

impl GradCheckable for SequenceProblem {
    fn block_names(&self) -> Vec<String> {
        let mut names = block_names();
        names.extend((0..self.xs.len()).map(|t| format!("x[{t}]")));
        names
    }

    fn block_mut(&mut self, index: usize) -> &mut Tensor {
        let n_params = 18;
        if index < n_params {
            self.model.blocks_mut().swap_remove(index)
        } else {
            &mut self.xs[index - n_params]
        }
    }

    fn logits(&self) -> Result<Tensor> {
        let pass = self.model.forward(&self.xs, 0.0, None)?;
        self.model.dense.logits(&pass.dropped)
    }

    fn targets(&self) -> &[usize] {
        &self.targets
    }

    fn analytic_gradients(&self) -> Result<Vec<Tensor>> {
        let pass = self.model.forward(&self.xs, 0.0, None)?;
        let (_, d_logits) = batch_cross_entropy(&pass.probs, &self.targets)?;
        let (grads, dxs) = self.model.backward(&pass, &d_logits)?;
        let mut out: Vec<Tensor> = grads.blocks().into_iter().cloned().collect();
        out.extend(dxs);
        Ok(out)
    }
}

/// Dense softmax head alone on fixed features; the loss is smooth and cheap.
#[derive(Debug, Clone)]
pub struct DenseProblem {
    pub dense: DenseParams,
    pub features: Tensor,
    pub targets: Vec<usize>,
}

impl GradCheckable for DenseProblem {
    fn block_names(&self) -> Vec<String> {
        vec!["dense.W".into(), "dense.b".into()]
    }

    fn block_mut(&mut self, index: usize) -> &mut Tensor {
        match index {
            0 => &mut self.dense.w,
            _ => &mut self.dense.b,
        }
    }

    fn logits(&self) -> Result<Tensor> {
        self.dense.logits(&self.features)
    }

    fn targets(&self) -> &[usize] {
        &self.targets
    }

    fn analytic_gradients(&self) -> Result<Vec<Tensor>> {
        let probs = self.dense.logits(&self.features)?.softmax_cols();
        let (_, d) = batch_cross_entropy(&probs, &self.targets)?;
        let (g, _) = self.dense.backward(&self.features, &d)?;
        Ok(vec![g.w, g.b])
    }
}
