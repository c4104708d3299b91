//! Mean absolute error, accumulated in f64.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Mean of `|pred - target|` over every element. Shapes must match exactly.
pub fn mae(pred: &Tensor, target: &Tensor) -> Result<f64> {
    if pred.shape() != target.shape() {
        return Err(Error::shape(format!(
            "mae over mismatched shapes {:?} vs {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let mut sum = 0.0f64;
    for (p, t) in pred.data().iter().zip(target.data()) {
        sum += (*p as f64 - *t as f64).abs();
    }
    Ok(sum / pred.len() as f64)
}
