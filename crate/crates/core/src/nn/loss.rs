use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const PROB_FLOOR: f64 = 1e-12;

/// `-ln p[target]` for a single probability column, with `p` clamped at 1e-12.
pub fn cross_entropy(probs: &Tensor, target: usize) -> Result<f64> {
    if probs.cols() != 1 {
        return Err(Error::dim("cross_entropy", (probs.rows(), 1), probs.shape()));
    }
    if target >= probs.rows() {
        return Err(Error::InvalidArgument(format!(
            "target class {target} out of range for {} classes",
            probs.rows()
        )));
    }
    Ok(-probs.get(target, 0).max(PROB_FLOOR).ln())
}

/// `∂L/∂logits = probs − onehot(target)`.
pub fn cross_entropy_grad(probs: &Tensor, target: usize) -> Result<Tensor> {
    if target >= probs.rows() {
        return Err(Error::InvalidArgument(format!(
            "target class {target} out of range for {} classes",
            probs.rows()
        )));
    }
    let mut g = probs.clone();
    for c in 0..g.cols() {
        g.set(target, c, g.get(target, c) - 1.0);
    }
    Ok(g)
}

/// Mean cross-entropy over the columns of `probs` and its gradient w.r.t. the logits.
pub fn batch_cross_entropy(probs: &Tensor, targets: &[usize]) -> Result<(f64, Tensor)> {
    if probs.cols() != targets.len() {
        return Err(Error::dim(
            "batch_cross_entropy",
            probs.shape(),
            (probs.rows(), targets.len()),
        ));
    }
    if targets.is_empty() {
        return Err(Error::Empty("batch targets"));
    }
    let n = targets.len() as f64;
    let mut grad = probs.scale(1.0 / n);
    let mut loss = 0.0;
    for (c, &t) in targets.iter().enumerate() {
        if t >= probs.rows() {
            return Err(Error::InvalidArgument(format!(
                "target class {t} out of range for {} classes",
                probs.rows()
            )));
        }
        loss -= probs.get(t, c).max(PROB_FLOOR).ln();
        grad.set(t, c, grad.get(t, c) - 1.0 / n);
    }
    Ok((loss / n, grad))
}
