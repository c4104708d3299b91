//! prunekit: magnitude pruning for small dense networks, with sparse and
//! quantized artifact encodings and an experiment harness that measures the
//! accuracy/size trade-off.

pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod model_io;
pub mod nn;
pub mod prune;
pub mod report;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
