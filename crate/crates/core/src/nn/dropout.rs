use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::tensor::Tensor;

/// Inverted dropout. Returns the output and the multiplicative mask
/// (0 or 1/(1−rate) per entry; all ones in inference mode).
pub fn dropout_with_mask(x: &Tensor, rate: f64, rng: &mut SeededRng, training: bool) -> Result<(Tensor, Tensor)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!("dropout rate {rate} not in [0, 1)")));
    }
    if !training || rate == 0.0 {
        return Ok((x.clone(), Tensor::filled(x.rows(), x.cols(), 1.0)));
    }
    let keep = 1.0 / (1.0 - rate);
    let mut mask = Tensor::zeros(x.rows(), x.cols());
    for m in mask.data_mut() {
        if rng.next_f64() >= rate {
            *m = keep;
        }
    }
    let out = x.hadamard(&mask)?;
    Ok((out, mask))
}

pub fn dropout(x: &Tensor, rate: f64, rng: &mut SeededRng, training: bool) -> Result<Tensor> {
    dropout_with_mask(x, rate, rng, training).map(|(out, _)| out)
}
