//! Asymmetric affine int8 quantization, one (scale, zero_point) pair per
//! tensor.
//!
//! The range always includes 0 so that an exactly-zero weight (a pruned one)
//! maps to the zero-point code and dequantizes to exactly 0.0. Codes are
//! `clamp(round(w / scale) + zero_point, 0, 255)` with `scale =
//! (hi - lo) / 255` over `lo = min(0, min w)`, `hi = max(0, max w)`;
//! reconstruction is `scale * (code - zero_point)`, accurate to `scale / 2`
//! plus f32 rounding.

use crate::error::{Error, Result};
use crate::nn::model::{Layer, Model};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedTensor {
    pub shape: Vec<usize>,
    pub scale: f32,
    pub zero_point: u8,
    pub values: Vec<u8>,
}

impl QuantizedTensor {
    /// Quantizes a tensor; all values must be finite.
    pub fn quantize(t: &Tensor) -> Result<Self> {
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for &w in t.data() {
            if !w.is_finite() {
                return Err(Error::numeric(format!(
                    "cannot quantize non-finite value {w}"
                )));
            }
            lo = lo.min(w as f64);
            hi = hi.max(w as f64);
        }
        let scale = if hi == lo { 1.0f32 } else { ((hi - lo) / 255.0) as f32 };
        let zero_point = (-lo / scale as f64).round().clamp(0.0, 255.0) as u8;
        let values = t
            .data()
            .iter()
            .map(|&w| {
                let q = (w as f64 / scale as f64).round() as i64 + zero_point as i64;
                q.clamp(0, 255) as u8
            })
            .collect();
        Ok(QuantizedTensor {
            shape: t.shape().to_vec(),
            scale,
            zero_point,
            values,
        })
    }

    pub fn dequantize(&self) -> Tensor {
        let zp = self.zero_point as i32;
        let data = self
            .values
            .iter()
            .map(|&q| self.scale * (q as i32 - zp) as f32)
            .collect();
        Tensor::new(self.shape.clone(), data).unwrap()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedLayer {
    pub name: String,
    pub weights: QuantizedTensor,
    pub bias: QuantizedTensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedModel {
    pub layers: Vec<QuantizedLayer>,
}

/// Quantizes every weight and bias tensor independently.
pub fn quantize(model: &Model) -> Result<QuantizedModel> {
    let layers = model
        .layers()
        .iter()
        .map(|l| {
            Ok(QuantizedLayer {
                name: l.spec.name.clone(),
                weights: QuantizedTensor::quantize(&l.weights)?,
                bias: QuantizedTensor::quantize(&l.bias)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantizedModel { layers })
}

/// Expands a quantized model back to f32 under the container's activation
/// convention (relu hidden layers, identity output, prunable).
pub fn dequantize(q: &QuantizedModel) -> Result<Model> {
    let names_dims: Vec<(String, usize, usize)> = q
        .layers
        .iter()
        .map(|l| {
            if l.weights.shape.len() != 2 {
                return Err(Error::shape(format!(
                    "layer '{}' weights must be rank 2, got {:?}",
                    l.name, l.weights.shape
                )));
            }
            Ok((l.name.clone(), l.weights.shape[0], l.weights.shape[1]))
        })
        .collect::<Result<Vec<_>>>()?;
    let specs = super::convention_specs(&names_dims);
    let layers = q
        .layers
        .iter()
        .zip(specs)
        .map(|(l, spec)| Layer {
            spec,
            weights: l.weights.dequantize(),
            bias: l.bias.dequantize(),
        })
        .collect();
    Model::from_layers(layers)
}
