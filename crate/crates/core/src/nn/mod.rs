//! Minimal dense-network stack: models, MAE loss and gradients, Adam, and a
//! plateau-scheduled training loop. Everything is deterministic given the
//! seeds in play; see [`crate::rng`].

pub mod loss;
pub mod model;
pub mod optim;
pub mod plateau;
pub mod train;

pub use loss::mae;
pub use model::{backward, forward, init_model, Activation, Gradients, Layer, LayerSpec, Model};
pub use optim::{adam_step, adam_step_masked, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use plateau::{PlateauParams, PlateauState};
pub use train::{train, Shuffle, Split, TrainParams};
