//! Model artifacts: a small binary container with dense, sparse-bitmap, and
//! int8 encodings, plus gzip sizing for the numbers reported everywhere.
//!
//! The container does not store activations. By convention every hidden
//! layer is relu and the output layer is identity, and loaded layers are
//! marked prunable; models that follow the convention round-trip exactly.

mod container;
mod quant;

pub use container::{
    describe, load, serialize_dense, serialize_quantized, serialize_sparse, ArtifactInfo,
    LayerInfo, LoadedModel, SPARSE_ZERO_FRACTION_THRESHOLD,
};
pub use quant::{dequantize, quantize, QuantizedLayer, QuantizedModel, QuantizedTensor};

use crate::nn::model::{Activation, LayerSpec};
use std::io::Write;

/// Which encoding an artifact carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    PrunedDense,
    SparseOptimized,
    Quantized,
}

impl Variant {
    /// Short stem used in filenames and CSV column names.
    pub fn stem(self) -> &'static str {
        match self {
            Variant::PrunedDense => "pruned",
            Variant::SparseOptimized => "sparse",
            Variant::Quantized => "quant",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::PrunedDense => "pruned-dense",
            Variant::SparseOptimized => "sparse-optimized",
            Variant::Quantized => "quantized",
        })
    }
}

/// Serialized model bytes plus their gzip form, the unit the experiment
/// pipeline hands around.
#[derive(Debug, Clone)]
pub struct ModelArtifact {
    pub variant: Variant,
    pub payload: Vec<u8>,
    pub gzip: Vec<u8>,
}

impl ModelArtifact {
    pub fn new(variant: Variant, payload: Vec<u8>) -> Self {
        let gzip = gzip_bytes(&payload);
        ModelArtifact {
            variant,
            payload,
            gzip,
        }
    }

    pub fn raw_size(&self) -> usize {
        self.payload.len()
    }

    pub fn gzip_size(&self) -> usize {
        self.gzip.len()
    }
}

/// Deterministic gzip: level 9, zeroed mtime, no name/comment fields, so the
/// same payload always yields the same bytes.
pub fn gzip_bytes(payload: &[u8]) -> Vec<u8> {
    let mut enc = flate2::GzBuilder::new()
        .mtime(0)
        .write(Vec::new(), flate2::Compression::new(9));
    enc.write_all(payload).expect("writing to a Vec cannot fail");
    enc.finish().expect("gzip encoding into a Vec cannot fail")
}

/// Size of the payload after deterministic gzip.
pub fn gzip_size(payload: &[u8]) -> usize {
    gzip_bytes(payload).len()
}

/// Layer specs under the container's activation convention: relu hidden
/// layers, identity output, everything prunable.
pub(crate) fn convention_specs(names_dims: &[(String, usize, usize)]) -> Vec<LayerSpec> {
    let last = names_dims.len().saturating_sub(1);
    names_dims
        .iter()
        .enumerate()
        .map(|(i, (name, out_dim, in_dim))| LayerSpec {
            name: name.clone(),
            in_dim: *in_dim,
            out_dim: *out_dim,
            activation: if i == last { Activation::Identity } else { Activation::Relu },
            prunable: true,
        })
        .collect()
}

/// Round-trips `payload` through every artifact size helper; used by tests.
#[cfg(test)]
pub(crate) fn gunzip(bytes: &[u8]) -> crate::error::Result<Vec<u8>> {
    use std::io::Read;
    let mut out = Vec::new();
    flate2::read::GzDecoder::new(bytes).read_to_end(&mut out)?;
    Ok(out)
}
