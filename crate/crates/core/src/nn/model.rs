//! Dense feed-forward models: construction, forward pass, and analytic
//! gradients for the mean-absolute-error objective.

use crate::error::{Error, Result};
use crate::rng::Lcg64;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f32) -> f32 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Identity => z,
        }
    }

    /// Derivative expressed in terms of the post-activation output. For relu
    /// this is exact away from 0 and picks the subgradient 0 at 0.
    #[inline]
    fn grad_from_output(self, y: f32) -> f32 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }
}

/// Static description of one dense layer.
///
/// Serialized artifacts do not store activations; by convention every hidden
/// layer uses relu and the output layer uses identity, which is what
/// [`crate::model_io::load`] reconstructs.
#[derive(Debug, Clone)]
pub struct LayerSpec {
    pub name: String,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    /// Whether magnitude pruning may mask this layer's weights.
    pub prunable: bool,
}

impl LayerSpec {
    pub fn new(
        name: impl Into<String>,
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        prunable: bool,
    ) -> Self {
        LayerSpec {
            name: name.into(),
            in_dim,
            out_dim,
            activation,
            prunable,
        }
    }
}

/// A dense layer: `weights` is `[out_dim, in_dim]` row-major, `bias` is
/// `[out_dim]`.
#[derive(Debug, Clone)]
pub struct Layer {
    pub spec: LayerSpec,
    pub weights: Tensor,
    pub bias: Tensor,
}

#[derive(Debug, Clone)]
pub struct Model {
    layers: Vec<Layer>,
}

impl Model {
    /// Assembles a model from explicit layers, checking that shapes chain and
    /// names are unique.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::config("model needs at least one layer"));
        }
        for (l, layer) in layers.iter().enumerate() {
            let s = &layer.spec;
            if s.name.is_empty() {
                return Err(Error::config(format!("layer {l} has an empty name")));
            }
            if s.in_dim == 0 || s.out_dim == 0 {
                return Err(Error::config(format!(
                    "layer '{}' has zero dimension ({} -> {})",
                    s.name, s.in_dim, s.out_dim
                )));
            }
            if layer.weights.shape() != [s.out_dim, s.in_dim] {
                return Err(Error::shape(format!(
                    "layer '{}' weights shape {:?}, expected [{}, {}]",
                    s.name,
                    layer.weights.shape(),
                    s.out_dim,
                    s.in_dim
                )));
            }
            if layer.bias.shape() != [s.out_dim] {
                return Err(Error::shape(format!(
                    "layer '{}' bias shape {:?}, expected [{}]",
                    s.name,
                    layer.bias.shape(),
                    s.out_dim
                )));
            }
            if l > 0 && layers[l - 1].spec.out_dim != s.in_dim {
                return Err(Error::config(format!(
                    "layer '{}' input dim {} does not chain with previous output dim {}",
                    s.name,
                    s.in_dim,
                    layers[l - 1].spec.out_dim
                )));
            }
        }
        for i in 1..layers.len() {
            if layers[..i].iter().any(|p| p.spec.name == layers[i].spec.name) {
                return Err(Error::config(format!(
                    "duplicate layer name '{}'",
                    layers[i].spec.name
                )));
            }
        }
        Ok(Model { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].spec.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().spec.out_dim
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Bit-exact equality of all weights and biases.
    pub fn bits_eq(&self, other: &Model) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.weights.bits_eq(&b.weights) && a.bias.bits_eq(&b.bias))
    }
}

/// Glorot-uniform initialization: weights drawn from
/// `U(-limit, limit)` with `limit = sqrt(6 / (in_dim + out_dim))`, biases
/// zero. Draws come from a single [`Lcg64`] seeded with `seed`, layer by
/// layer in spec order, row-major within a layer, so a given (specs, seed)
/// pair always produces the same bits.
pub fn init_model(specs: &[LayerSpec], seed: u64) -> Result<Model> {
    let mut rng = Lcg64::new(seed);
    let mut layers = Vec::with_capacity(specs.len());
    for spec in specs {
        if spec.in_dim == 0 || spec.out_dim == 0 {
            return Err(Error::config(format!(
                "layer '{}' has zero dimension ({} -> {})",
                spec.name, spec.in_dim, spec.out_dim
            )));
        }
        let limit = (6.0 / (spec.in_dim + spec.out_dim) as f64).sqrt();
        let n = spec
            .in_dim
            .checked_mul(spec.out_dim)
            .ok_or_else(|| Error::config(format!("layer '{}' is too large", spec.name)))?;
        let data: Vec<f32> = (0..n).map(|_| rng.uniform(-limit, limit) as f32).collect();
        layers.push(Layer {
            spec: spec.clone(),
            weights: Tensor::new(vec![spec.out_dim, spec.in_dim], data)?,
            bias: Tensor::zeros(vec![spec.out_dim])?,
        });
    }
    Model::from_layers(layers)
}

/// Runs `batch` (`[B, in_dim]`) through the model, returning `[B, out_dim]`.
pub fn forward(model: &Model, batch: &Tensor) -> Result<Tensor> {
    let acts = forward_cached(model, batch)?;
    Ok(acts.into_iter().last().unwrap())
}

/// Forward pass keeping every layer's post-activation output; `result[l]` is
/// the output of layer `l`.
pub(crate) fn forward_cached(model: &Model, batch: &Tensor) -> Result<Vec<Tensor>> {
    if batch.shape().len() != 2 {
        return Err(Error::shape(format!(
            "input batch must be rank 2, got {:?}",
            batch.shape()
        )));
    }
    if batch.cols() != model.in_dim() {
        return Err(Error::shape(format!(
            "input batch has {} features, model expects {}",
            batch.cols(),
            model.in_dim()
        )));
    }
    let rows = batch.rows();
    let mut acts = Vec::with_capacity(model.layers.len());
    let mut cur = batch;
    for layer in &model.layers {
        let (out_d, in_d) = (layer.spec.out_dim, layer.spec.in_dim);
        let w = layer.weights.data();
        let b = layer.bias.data();
        let mut out = vec![0.0f32; rows * out_d];
        for r in 0..rows {
            let x = cur.row(r);
            let y = &mut out[r * out_d..(r + 1) * out_d];
            for o in 0..out_d {
                let wrow = &w[o * in_d..(o + 1) * in_d];
                let mut acc = b[o];
                for i in 0..in_d {
                    acc += wrow[i] * x[i];
                }
                y[o] = layer.spec.activation.apply(acc);
            }
        }
        acts.push(Tensor::new(vec![rows, out_d], out)?);
        cur = acts.last().unwrap();
    }
    Ok(acts)
}

/// Per-layer parameter gradients, parallel to `model.layers()`.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Tensor>,
    pub biases: Vec<Tensor>,
}

impl Gradients {
    pub fn zeros_like(model: &Model) -> Self {
        Gradients {
            weights: model
                .layers()
                .iter()
                .map(|l| Tensor::zeros(l.weights.shape().to_vec()).unwrap())
                .collect(),
            biases: model
                .layers()
                .iter()
                .map(|l| Tensor::zeros(l.bias.shape().to_vec()).unwrap())
                .collect(),
        }
    }
}

/// Analytic gradients of mean absolute error over the batch with respect to
/// every weight and bias. Subgradient conventions: d|x|/dx is 0 at x = 0, and
/// relu' is 0 at 0.
pub fn backward(model: &Model, batch: &Tensor, target: &Tensor) -> Result<Gradients> {
    let acts = forward_cached(model, batch)?;
    let pred = acts.last().unwrap();
    if pred.shape() != target.shape() {
        return Err(Error::shape(format!(
            "target shape {:?} does not match prediction shape {:?}",
            target.shape(),
            pred.shape()
        )));
    }
    let rows = batch.rows();
    let inv = (1.0 / pred.len() as f64) as f32;
    // dL/dy for the output layer.
    let mut delta: Vec<f32> = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| {
            let d = p - t;
            if d > 0.0 {
                inv
            } else if d < 0.0 {
                -inv
            } else {
                0.0
            }
        })
        .collect();

    let mut grads = Gradients::zeros_like(model);
    for l in (0..model.layers.len()).rev() {
        let layer = &model.layers[l];
        let (out_d, in_d) = (layer.spec.out_dim, layer.spec.in_dim);
        let y = &acts[l];
        let input: &Tensor = if l == 0 { batch } else { &acts[l - 1] };
        let w = layer.weights.data();
        let dw = grads.weights[l].data_mut();
        let db = grads.biases[l].data_mut();
        let mut next_delta = vec![0.0f32; rows * in_d];
        for r in 0..rows {
            let yrow = y.row(r);
            let xrow = input.row(r);
            let drow = &delta[r * out_d..(r + 1) * out_d];
            let ndrow = &mut next_delta[r * in_d..(r + 1) * in_d];
            for o in 0..out_d {
                let dz = drow[o] * layer.spec.activation.grad_from_output(yrow[o]);
                if dz == 0.0 {
                    continue;
                }
                db[o] += dz;
                let wrow = &w[o * in_d..(o + 1) * in_d];
                let dwrow = &mut dw[o * in_d..(o + 1) * in_d];
                for i in 0..in_d {
                    dwrow[i] += dz * xrow[i];
                    ndrow[i] += dz * wrow[i];
                }
            }
        }
        delta = next_delta;
    }
    Ok(grads)
}
