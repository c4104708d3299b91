//! Reduce-on-plateau learning-rate schedule.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct PlateauParams {
    /// Number of consecutive non-improving epochs tolerated before a cut.
    pub patience: u32,
    /// Multiplier applied to the learning rate at a cut, in (0, 1).
    pub factor: f64,
    /// Lower bound the learning rate never drops below.
    pub min_lr: f64,
}

impl Default for PlateauParams {
    fn default() -> Self {
        PlateauParams {
            patience: 3,
            factor: 0.5,
            min_lr: 1e-5,
        }
    }
}

impl PlateauParams {
    pub fn validate(&self) -> Result<()> {
        if self.patience == 0 {
            return Err(Error::config("plateau patience must be at least 1"));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::config(format!(
                "plateau factor {} must be in (0, 1)",
                self.factor
            )));
        }
        if !(self.min_lr > 0.0) || !self.min_lr.is_finite() {
            return Err(Error::config(format!(
                "plateau min_lr {} must be positive",
                self.min_lr
            )));
        }
        Ok(())
    }
}

/// Tracks the best validation value seen; `patience` consecutive epochs
/// without improvement multiply the learning rate by `factor` (floored at
/// `min_lr`) and reset the wait counter. The best value is kept across cuts.
#[derive(Debug, Clone)]
pub struct PlateauState {
    params: PlateauParams,
    lr: f64,
    best: f64,
    wait: u32,
}

impl PlateauState {
    pub fn new(initial_lr: f64, params: PlateauParams) -> Result<Self> {
        params.validate()?;
        if !initial_lr.is_finite() || initial_lr < params.min_lr {
            return Err(Error::config(format!(
                "initial learning rate {initial_lr} must be finite and >= min_lr {}",
                params.min_lr
            )));
        }
        Ok(PlateauState {
            params,
            lr: initial_lr,
            best: f64::INFINITY,
            wait: 0,
        })
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    /// Feed one epoch's validation MAE. Improvement means strictly below the
    /// best seen so far.
    pub fn update(&mut self, val_mae: f64) {
        if val_mae < self.best {
            self.best = val_mae;
            self.wait = 0;
        } else {
            self.wait += 1;
            if self.wait >= self.params.patience {
                self.lr = (self.lr * self.params.factor).max(self.params.min_lr);
                self.wait = 0;
            }
        }
    }
}
