//! The `PMK1` binary container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic "PMK1" | version u16 | layer_count u16
//! then per layer:
//!   name_len u16 | name (UTF-8)
//!   dtype u8      0 = f32 dense, 1 = f32 sparse bitmap, 2 = int8 affine
//!   rank u8       always 2 in version 1 (weights are [out_dim, in_dim])
//!   dims          rank x u32
//!   weights       dtype 0: out*in x f32
//!                 dtype 1: presence bitmap of ceil(n/8) bytes (bit j of
//!                          byte k covers element 8k + j, LSB first; set =
//!                          value stored), then one f32 per set bit
//!                 dtype 2: scale f32, zero_point u8, n x u8 codes
//!   bias          dtype 0/1: out x f32
//!                 dtype 2:   scale f32, zero_point u8, out x u8 codes
//! ```
//!
//! The sparse bitmap elides exactly the +0.0 entries (bit pattern zero);
//! -0.0 is stored, so decode(encode(t)) reproduces t bit for bit. A file is
//! either all-f32 (dtypes 0/1 may mix per layer) or all-quantized.
//!
//! Parsing is strict: unknown versions and dtypes, zero dims, non-chaining
//! layers, duplicate or empty names, non-finite payloads, stored +0.0 sparse
//! values, nonzero bitmap padding, and trailing bytes are all format errors
//! carrying the byte offset of the problem.

use crate::error::{Error, Result};
use crate::model_io::quant::{QuantizedLayer, QuantizedModel, QuantizedTensor};
use crate::model_io::{convention_specs, Variant};
use crate::nn::model::{Layer, Model};
use crate::tensor::Tensor;

pub(crate) const MAGIC: [u8; 4] = *b"PMK1";
pub(crate) const FORMAT_VERSION: u16 = 1;

const DTYPE_F32_DENSE: u8 = 0;
const DTYPE_F32_SPARSE: u8 = 1;
const DTYPE_INT8: u8 = 2;

/// Layers whose weights have at least this fraction of +0.0 entries are
/// written with the sparse bitmap encoding.
pub const SPARSE_ZERO_FRACTION_THRESHOLD: f64 = 0.25;

/// Refuse to allocate tensors beyond this many elements when parsing.
const MAX_TENSOR_ELEMS: usize = 1 << 26;

// ---------------------------------------------------------------- writing

fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f32(out: &mut Vec<u8>, v: f32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn write_header(out: &mut Vec<u8>, layer_count: usize) -> Result<()> {
    out.extend_from_slice(&MAGIC);
    put_u16(out, FORMAT_VERSION);
    let count: u16 = layer_count
        .try_into()
        .map_err(|_| Error::config(format!("{layer_count} layers exceed the container limit")))?;
    put_u16(out, count);
    Ok(())
}

fn write_layer_prefix(out: &mut Vec<u8>, name: &str, dtype: u8, out_dim: usize, in_dim: usize) -> Result<()> {
    let len: u16 = name
        .len()
        .try_into()
        .map_err(|_| Error::config(format!("layer name '{name}' is too long")))?;
    put_u16(out, len);
    out.extend_from_slice(name.as_bytes());
    out.push(dtype);
    out.push(2); // rank
    for d in [out_dim, in_dim] {
        let d: u32 = d
            .try_into()
            .map_err(|_| Error::config(format!("dimension {d} exceeds the container limit")))?;
        put_u32(out, d);
    }
    Ok(())
}

/// Fraction of entries that are +0.0 (bit pattern zero), the ones the sparse
/// encoding can elide.
fn elidable_fraction(t: &Tensor) -> f64 {
    if t.is_empty() {
        return 0.0;
    }
    let z = t.data().iter().filter(|w| w.to_bits() == 0).count();
    z as f64 / t.len() as f64
}

/// Serializes every layer with the dense f32 encoding.
pub fn serialize_dense(model: &Model) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_header(&mut out, model.layers().len())?;
    for layer in model.layers() {
        write_layer_prefix(
            &mut out,
            &layer.spec.name,
            DTYPE_F32_DENSE,
            layer.spec.out_dim,
            layer.spec.in_dim,
        )?;
        for &w in layer.weights.data() {
            put_f32(&mut out, w);
        }
        for &b in layer.bias.data() {
            put_f32(&mut out, b);
        }
    }
    Ok(out)
}

/// Serializes with the sparse bitmap encoding on every layer whose weight
/// zero fraction reaches [`SPARSE_ZERO_FRACTION_THRESHOLD`]; other layers
/// stay dense. Biases are always dense.
pub fn serialize_sparse(model: &Model) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_header(&mut out, model.layers().len())?;
    for layer in model.layers() {
        let sparse = elidable_fraction(&layer.weights) >= SPARSE_ZERO_FRACTION_THRESHOLD;
        let dtype = if sparse { DTYPE_F32_SPARSE } else { DTYPE_F32_DENSE };
        write_layer_prefix(&mut out, &layer.spec.name, dtype, layer.spec.out_dim, layer.spec.in_dim)?;
        if sparse {
            let data = layer.weights.data();
            let mut bitmap = vec![0u8; data.len().div_ceil(8)];
            for (i, w) in data.iter().enumerate() {
                if w.to_bits() != 0 {
                    bitmap[i / 8] |= 1 << (i % 8);
                }
            }
            out.extend_from_slice(&bitmap);
            for w in data.iter().filter(|w| w.to_bits() != 0) {
                put_f32(&mut out, *w);
            }
        } else {
            for &w in layer.weights.data() {
                put_f32(&mut out, w);
            }
        }
        for &b in layer.bias.data() {
            put_f32(&mut out, b);
        }
    }
    Ok(out)
}

/// Serializes a quantized model; every tensor is `scale | zero_point | codes`.
pub fn serialize_quantized(model: &QuantizedModel) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_header(&mut out, model.layers.len())?;
    for layer in &model.layers {
        if layer.weights.shape.len() != 2 {
            return Err(Error::shape(format!(
                "layer '{}' weights must be rank 2, got {:?}",
                layer.name, layer.weights.shape
            )));
        }
        let (out_dim, in_dim) = (layer.weights.shape[0], layer.weights.shape[1]);
        if layer.bias.shape != [out_dim] {
            return Err(Error::shape(format!(
                "layer '{}' bias shape {:?} does not match out dim {}",
                layer.name, layer.bias.shape, out_dim
            )));
        }
        write_layer_prefix(&mut out, &layer.name, DTYPE_INT8, out_dim, in_dim)?;
        for t in [&layer.weights, &layer.bias] {
            put_f32(&mut out, t.scale);
            out.push(t.zero_point);
            out.extend_from_slice(&t.values);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- reading

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(
                self.pos,
                format!("unexpected end of data reading {what}"),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        let b = self.take(2, what)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        let b = self.take(4, what)?;
        Ok(f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn finite_f32(&mut self, what: &str) -> Result<f32> {
        let at = self.pos;
        let v = self.f32(what)?;
        if !v.is_finite() {
            return Err(Error::format(at, format!("non-finite value in {what}")));
        }
        Ok(v)
    }
}

enum Decoded {
    F32(Tensor),
    Q8(QuantizedTensor),
}

struct ParsedLayer {
    name: String,
    dtype: u8,
    out_dim: usize,
    in_dim: usize,
    weights: Decoded,
    bias: Decoded,
}

fn parse(bytes: &[u8]) -> Result<Vec<ParsedLayer>> {
    let mut r = Reader::new(bytes);
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::format(0, "bad magic, not a PMK1 artifact"));
    }
    let version_at = r.pos;
    let version = r.u16("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::format(
            version_at,
            format!("unsupported version {version} (expected {FORMAT_VERSION})"),
        ));
    }
    let count_at = r.pos;
    let layer_count = r.u16("layer count")? as usize;
    if layer_count == 0 {
        return Err(Error::format(count_at, "artifact contains no layers"));
    }

    let mut layers: Vec<ParsedLayer> = Vec::with_capacity(layer_count);
    let mut quantized: Option<bool> = None;
    for li in 0..layer_count {
        let name_at = r.pos;
        let name_len = r.u16("name length")? as usize;
        let name_bytes = r.take(name_len, "layer name")?;
        let name = std::str::from_utf8(name_bytes)
            .map_err(|_| Error::format(name_at + 2, "layer name is not UTF-8"))?
            .to_string();
        if name.is_empty() {
            return Err(Error::format(name_at, "empty layer name"));
        }
        if layers.iter().any(|l| l.name == name) {
            return Err(Error::format(name_at, format!("duplicate layer name '{name}'")));
        }

        let dtype_at = r.pos;
        let dtype = r.u8("dtype")?;
        if dtype > DTYPE_INT8 {
            return Err(Error::format(dtype_at, format!("unknown dtype {dtype}")));
        }
        let is_q = dtype == DTYPE_INT8;
        match quantized {
            None => quantized = Some(is_q),
            Some(q) if q != is_q => {
                return Err(Error::format(
                    dtype_at,
                    "artifact mixes quantized and float layers",
                ))
            }
            _ => {}
        }

        let rank_at = r.pos;
        let rank = r.u8("rank")?;
        if rank != 2 {
            return Err(Error::format(
                rank_at,
                format!("unsupported tensor rank {rank} (version 1 stores rank-2 weights)"),
            ));
        }
        let dims_at = r.pos;
        let out_dim = r.u32("dims")? as usize;
        let in_dim = r.u32("dims")? as usize;
        if out_dim == 0 || in_dim == 0 {
            return Err(Error::format(dims_at, format!("zero dimension {out_dim}x{in_dim}")));
        }
        let n = out_dim
            .checked_mul(in_dim)
            .filter(|n| *n <= MAX_TENSOR_ELEMS)
            .ok_or_else(|| {
                Error::format(dims_at, format!("tensor {out_dim}x{in_dim} is too large"))
            })?;
        if li > 0 {
            let prev = &layers[li - 1];
            if prev.out_dim != in_dim {
                return Err(Error::format(
                    dims_at,
                    format!(
                        "layer '{name}' input dim {in_dim} does not chain with previous output dim {}",
                        prev.out_dim
                    ),
                ));
            }
        }

        let weights = match dtype {
            DTYPE_F32_DENSE => {
                let mut data = Vec::with_capacity(n);
                for _ in 0..n {
                    data.push(r.finite_f32("weights")?);
                }
                Decoded::F32(Tensor::new(vec![out_dim, in_dim], data).unwrap())
            }
            DTYPE_F32_SPARSE => {
                let bitmap_at = r.pos;
                let bitmap = r.take(n.div_ceil(8), "sparse bitmap")?;
                if n % 8 != 0 {
                    let padding = bitmap[bitmap.len() - 1] >> (n % 8);
                    if padding != 0 {
                        return Err(Error::format(
                            bitmap_at + bitmap.len() - 1,
                            "nonzero padding bits in sparse bitmap",
                        ));
                    }
                }
                let mut data = vec![0.0f32; n];
                for i in 0..n {
                    if bitmap[i / 8] & (1 << (i % 8)) != 0 {
                        let at = r.pos;
                        let v = r.finite_f32("sparse values")?;
                        if v.to_bits() == 0 {
                            return Err(Error::format(
                                at,
                                "sparse value stored as explicit +0.0",
                            ));
                        }
                        data[i] = v;
                    }
                }
                Decoded::F32(Tensor::new(vec![out_dim, in_dim], data).unwrap())
            }
            _ => Decoded::Q8(read_q8(&mut r, vec![out_dim, in_dim], n)?),
        };
        let bias = if is_q {
            Decoded::Q8(read_q8(&mut r, vec![out_dim], out_dim)?)
        } else {
            let mut data = Vec::with_capacity(out_dim);
            for _ in 0..out_dim {
                data.push(r.finite_f32("bias")?);
            }
            Decoded::F32(Tensor::new(vec![out_dim], data).unwrap())
        };

        layers.push(ParsedLayer {
            name,
            dtype,
            out_dim,
            in_dim,
            weights,
            bias,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::format(
            r.pos,
            format!("{} trailing bytes after the last layer", bytes.len() - r.pos),
        ));
    }
    Ok(layers)
}

fn read_q8(r: &mut Reader, shape: Vec<usize>, n: usize) -> Result<QuantizedTensor> {
    let at = r.pos;
    let scale = r.finite_f32("quant scale")?;
    if scale <= 0.0 {
        return Err(Error::format(at, format!("non-positive quant scale {scale}")));
    }
    let zero_point = r.u8("quant zero point")?;
    let values = r.take(n, "quant codes")?.to_vec();
    Ok(QuantizedTensor {
        shape,
        scale,
        zero_point,
        values,
    })
}

/// A parsed artifact: float containers decode to a full [`Model`] under the
/// activation convention; quantized containers stay quantized.
#[derive(Debug, Clone)]
pub enum LoadedModel {
    F32(Model),
    Quantized(QuantizedModel),
}

impl LoadedModel {
    /// Expands to an f32 model either way (dequantizing if needed).
    pub fn into_model(self) -> Result<Model> {
        match self {
            LoadedModel::F32(m) => Ok(m),
            LoadedModel::Quantized(q) => crate::model_io::quant::dequantize(&q),
        }
    }
}

/// Parses and validates artifact bytes.
pub fn load(bytes: &[u8]) -> Result<LoadedModel> {
    let layers = parse(bytes)?;
    if layers.iter().any(|l| l.dtype == DTYPE_INT8) {
        let layers = layers
            .into_iter()
            .map(|l| {
                let (weights, bias) = match (l.weights, l.bias) {
                    (Decoded::Q8(w), Decoded::Q8(b)) => (w, b),
                    _ => unreachable!("parse enforces uniform dtypes"),
                };
                QuantizedLayer {
                    name: l.name,
                    weights,
                    bias,
                }
            })
            .collect();
        return Ok(LoadedModel::Quantized(QuantizedModel { layers }));
    }
    let names_dims: Vec<(String, usize, usize)> = layers
        .iter()
        .map(|l| (l.name.clone(), l.out_dim, l.in_dim))
        .collect();
    let specs = convention_specs(&names_dims);
    let model_layers = layers
        .into_iter()
        .zip(specs)
        .map(|(l, spec)| {
            let (weights, bias) = match (l.weights, l.bias) {
                (Decoded::F32(w), Decoded::F32(b)) => (w, b),
                _ => unreachable!("parse enforces uniform dtypes"),
            };
            Layer { spec, weights, bias }
        })
        .collect();
    // Parse already validated chaining, names, and dims.
    Model::from_layers(model_layers)
        .map(LoadedModel::F32)
        .map_err(|e| Error::format(0, format!("inconsistent artifact: {e}")))
}

/// Per-layer facts about an artifact, for display.
#[derive(Debug, Clone)]
pub struct LayerInfo {
    pub name: String,
    pub out_dim: usize,
    pub in_dim: usize,
    pub encoding: &'static str,
    /// Zero fraction of the decoded weights (quantized: codes at zero point).
    pub zero_fraction: f64,
    pub scale: Option<f32>,
    pub zero_point: Option<u8>,
}

#[derive(Debug, Clone)]
pub struct ArtifactInfo {
    pub variant: Variant,
    pub layers: Vec<LayerInfo>,
}

/// Describes artifact bytes without committing to a decode; same validation
/// as [`load`].
pub fn describe(bytes: &[u8]) -> Result<ArtifactInfo> {
    let layers = parse(bytes)?;
    let variant = if layers.iter().any(|l| l.dtype == DTYPE_INT8) {
        Variant::Quantized
    } else if layers.iter().any(|l| l.dtype == DTYPE_F32_SPARSE) {
        Variant::SparseOptimized
    } else {
        Variant::PrunedDense
    };
    let layers = layers
        .into_iter()
        .map(|l| {
            let (encoding, zero_fraction, scale, zero_point) = match &l.weights {
                Decoded::F32(t) => (
                    if l.dtype == DTYPE_F32_SPARSE { "f32-sparse-bitmap" } else { "f32-dense" },
                    t.zero_fraction(),
                    None,
                    None,
                ),
                Decoded::Q8(q) => {
                    let zp = q.zero_point;
                    let zf = q.values.iter().filter(|v| **v == zp).count() as f64
                        / q.values.len() as f64;
                    ("int8", zf, Some(q.scale), Some(zp))
                }
            };
            LayerInfo {
                name: l.name,
                out_dim: l.out_dim,
                in_dim: l.in_dim,
                encoding,
                zero_fraction,
                scale,
                zero_point,
            }
        })
        .collect();
    Ok(ArtifactInfo { variant, layers })
}
