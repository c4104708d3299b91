//! Adam with bias correction, plus a masked variant that leaves pruned
//! entries (parameters *and* their moments) untouched.

use crate::error::{Error, Result};
use crate::nn::model::{Gradients, Model};
use crate::tensor::Tensor;

pub const ADAM_BETA1: f32 = 0.9;
pub const ADAM_BETA2: f32 = 0.999;
pub const ADAM_EPS: f32 = 1e-8;

/// First/second moment estimates for every parameter tensor, and the step
/// counter used for bias correction.
#[derive(Debug, Clone)]
pub struct AdamState {
    m_w: Vec<Tensor>,
    v_w: Vec<Tensor>,
    m_b: Vec<Tensor>,
    v_b: Vec<Tensor>,
    t: u64,
}

impl AdamState {
    pub fn new(model: &Model) -> Self {
        let zw = |m: &Model| -> Vec<Tensor> {
            m.layers()
                .iter()
                .map(|l| Tensor::zeros(l.weights.shape().to_vec()).unwrap())
                .collect()
        };
        let zb = |m: &Model| -> Vec<Tensor> {
            m.layers()
                .iter()
                .map(|l| Tensor::zeros(l.bias.shape().to_vec()).unwrap())
                .collect()
        };
        AdamState {
            m_w: zw(model),
            v_w: zw(model),
            m_b: zb(model),
            v_b: zb(model),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn weight_moments(&self, layer: usize) -> (&Tensor, &Tensor) {
        (&self.m_w[layer], &self.v_w[layer])
    }

    pub fn bias_moments(&self, layer: usize) -> (&Tensor, &Tensor) {
        (&self.m_b[layer], &self.v_b[layer])
    }
}

/// One Adam step over every parameter.
pub fn adam_step(
    model: &mut Model,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    let masks: Vec<Option<&Tensor>> = vec![None; model.layers().len()];
    adam_step_masked(model, grads, state, lr, &masks)
}

/// One Adam step that skips weight entries whose mask is 0: their parameter
/// values and moments are left exactly as they were, so a pruned weight's
/// optimizer state does not drift while it is masked. Biases are never
/// masked. The step counter advances once per call.
pub fn adam_step_masked(
    model: &mut Model,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
    weight_masks: &[Option<&Tensor>],
) -> Result<()> {
    let nl = model.layers().len();
    if grads.weights.len() != nl || grads.biases.len() != nl {
        return Err(Error::shape("gradient layer count does not match model"));
    }
    if weight_masks.len() != nl {
        return Err(Error::shape("mask layer count does not match model"));
    }
    for (l, layer) in model.layers().iter().enumerate() {
        if grads.weights[l].shape() != layer.weights.shape()
            || grads.biases[l].shape() != layer.bias.shape()
        {
            return Err(Error::shape(format!(
                "gradient shape mismatch at layer '{}'",
                layer.spec.name
            )));
        }
        if let Some(mask) = weight_masks[l] {
            if mask.shape() != layer.weights.shape() {
                return Err(Error::shape(format!(
                    "mask shape mismatch at layer '{}'",
                    layer.spec.name
                )));
            }
        }
        for g in grads.weights[l].data().iter().chain(grads.biases[l].data()) {
            if !g.is_finite() {
                return Err(Error::numeric(format!(
                    "non-finite gradient in layer '{}'",
                    layer.spec.name
                )));
            }
        }
    }
    if !lr.is_finite() || lr <= 0.0 {
        return Err(Error::config(format!("learning rate {lr} must be positive")));
    }

    state.t += 1;
    // Bias-correction factors in f64, applied as f32 multipliers.
    let c1 = (1.0 / (1.0 - (ADAM_BETA1 as f64).powi(state.t as i32))) as f32;
    let c2 = (1.0 / (1.0 - (ADAM_BETA2 as f64).powi(state.t as i32))) as f32;
    let lr = lr as f32;

    #[inline]
    fn update(p: &mut f32, g: f32, m: &mut f32, v: &mut f32, c1: f32, c2: f32, lr: f32) {
        *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
        *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
        let mhat = *m * c1;
        let vhat = *v * c2;
        *p -= lr * mhat / (vhat.sqrt() + ADAM_EPS);
    }

    for (l, layer) in model.layers_mut().iter_mut().enumerate() {
        let mask = weight_masks[l].map(|m| m.data());
        let gw = grads.weights[l].data();
        let pw = layer.weights.data_mut();
        let mw = state.m_w[l].data_mut();
        let vw = state.v_w[l].data_mut();
        for e in 0..pw.len() {
            if let Some(m) = mask {
                if m[e] == 0.0 {
                    continue;
                }
            }
            update(&mut pw[e], gw[e], &mut mw[e], &mut vw[e], c1, c2, lr);
        }
        let gb = grads.biases[l].data();
        let pb = layer.bias.data_mut();
        let mb = state.m_b[l].data_mut();
        let vb = state.v_b[l].data_mut();
        for e in 0..pb.len() {
            update(&mut pb[e], gb[e], &mut mb[e], &mut vb[e], c1, c2, lr);
        }
    }
    Ok(())
}
