//! Full-batch-loop training with Adam and plateau LR scheduling.

use crate::error::{Error, Result};
use crate::nn::loss::mae;
use crate::nn::model::{backward, forward, Model};
use crate::nn::optim::{adam_step, AdamState};
use crate::nn::plateau::{PlateauParams, PlateauState};
use crate::rng::{seed_stream, stream, Lcg64};
use crate::tensor::Tensor;

/// Sample ordering across epochs. `None` keeps the natural order every
/// epoch; `Seeded` reshuffles per epoch from the given seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shuffle {
    None,
    Seeded(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct TrainParams {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub plateau: PlateauParams,
    pub shuffle: Shuffle,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            lr: 1e-3,
            batch_size: 128,
            epochs: 80,
            plateau: PlateauParams::default(),
            shuffle: Shuffle::None,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::config(format!("learning rate {} must be positive", self.lr)));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch size must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::config("epoch count must be at least 1"));
        }
        self.plateau.validate()
    }
}

/// One dataset split: `inputs` is `[N, in_dim]`, `targets` is `[N, out_dim]`,
/// row `i` of each belongs to the same sample.
#[derive(Debug, Clone)]
pub struct Split {
    pub inputs: Tensor,
    pub targets: Tensor,
}

impl Split {
    pub fn new(inputs: Tensor, targets: Tensor) -> Result<Self> {
        if inputs.shape().len() != 2 || targets.shape().len() != 2 {
            return Err(Error::shape("split tensors must be rank 2"));
        }
        if inputs.rows() != targets.rows() {
            return Err(Error::shape(format!(
                "split has {} input rows but {} target rows",
                inputs.rows(),
                targets.rows()
            )));
        }
        Ok(Split { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sample visit order for one epoch.
pub(crate) fn epoch_sample_order(n: usize, shuffle: Shuffle, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if let Shuffle::Seeded(seed) = shuffle {
        let mut rng = Lcg64::new(seed_stream(seed, &[stream::SHUFFLE, epoch as u64]));
        rng.shuffle(&mut order);
    }
    order
}

/// Copies the rows named by `idx` into contiguous batch tensors.
pub(crate) fn gather_batch(split: &Split, idx: &[usize]) -> (Tensor, Tensor) {
    let (ic, tc) = (split.inputs.cols(), split.targets.cols());
    let mut bx = Vec::with_capacity(idx.len() * ic);
    let mut by = Vec::with_capacity(idx.len() * tc);
    for &i in idx {
        bx.extend_from_slice(split.inputs.row(i));
        by.extend_from_slice(split.targets.row(i));
    }
    (
        Tensor::new(vec![idx.len(), ic], bx).unwrap(),
        Tensor::new(vec![idx.len(), tc], by).unwrap(),
    )
}

pub(crate) fn check_split_fits(model: &Model, split: &Split, what: &str) -> Result<()> {
    if split.inputs.cols() != model.in_dim() {
        return Err(Error::shape(format!(
            "{what} inputs have {} features, model expects {}",
            split.inputs.cols(),
            model.in_dim()
        )));
    }
    if split.targets.cols() != model.out_dim() {
        return Err(Error::shape(format!(
            "{what} targets have {} outputs, model expects {}",
            split.targets.cols(),
            model.out_dim()
        )));
    }
    Ok(())
}

/// Trains in place and returns the per-epoch validation MAE curve.
///
/// Each epoch is one pass over the training split in `params.batch_size`
/// chunks (the last chunk may be short), followed by a validation pass whose
/// MAE drives the plateau schedule. A non-finite validation MAE aborts the
/// run with a numeric error.
pub fn train(
    model: &mut Model,
    train_split: &Split,
    val_split: &Split,
    params: &TrainParams,
) -> Result<Vec<f64>> {
    params.validate()?;
    check_split_fits(model, train_split, "train")?;
    check_split_fits(model, val_split, "validation")?;
    if train_split.len() < params.batch_size {
        return Err(Error::config(format!(
            "training split ({} samples) is smaller than the batch size ({})",
            train_split.len(),
            params.batch_size
        )));
    }
    if val_split.is_empty() {
        return Err(Error::config("validation split is empty"));
    }

    let mut plateau = PlateauState::new(params.lr, params.plateau)?;
    let mut adam = AdamState::new(model);
    let mut curve = Vec::with_capacity(params.epochs);
    for epoch in 0..params.epochs {
        let order = epoch_sample_order(train_split.len(), params.shuffle, epoch);
        for chunk in order.chunks(params.batch_size) {
            let (bx, by) = gather_batch(train_split, chunk);
            let grads = backward(model, &bx, &by)?;
            adam_step(model, &grads, &mut adam, plateau.lr())?;
        }
        let val_mae = mae(&forward(model, &val_split.inputs)?, &val_split.targets)?;
        if !val_mae.is_finite() {
            return Err(Error::numeric(format!(
                "validation MAE became non-finite at epoch {epoch}"
            )));
        }
        curve.push(val_mae);
        plateau.update(val_mae);
    }
    Ok(curve)
}
