//! Synthetic regression data.
//!
//! Targets come from a frozen teacher network: a two-layer tanh net whose
//! weights are drawn once from the dataset seed, evaluated in f64, plus
//! Gaussian observation noise. Inputs are uniform on [-1, 1). The three
//! splits are carved out of one sequential sample stream, so they are
//! disjoint by construction and the whole dataset is a pure function of its
//! config.

use crate::error::{Error, Result};
use crate::nn::train::Split;
use crate::rng::{seed_stream, stream, Lcg64};
use crate::tensor::Tensor;

const TEACHER_HIDDEN: usize = 128;
const TEACHER_W1_AMP: f64 = 0.45;
const TEACHER_B1_AMP: f64 = 0.5;
const TEACHER_W2_AMP: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetConfig {
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub in_dim: usize,
    pub out_dim: usize,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n_train: 8192,
            n_val: 1024,
            n_test: 1024,
            in_dim: 16,
            out_dim: 3,
            noise_std: 0.05,
            seed: 0,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_val == 0 || self.n_test == 0 {
            return Err(Error::config("every split needs at least one sample"));
        }
        if self.in_dim == 0 || self.out_dim == 0 {
            return Err(Error::config("dataset dimensions must be positive"));
        }
        if !self.noise_std.is_finite() || self.noise_std < 0.0 {
            return Err(Error::config(format!(
                "noise_std {} must be finite and non-negative",
                self.noise_std
            )));
        }
        Ok(())
    }
}

/// The frozen target map. Weights are f32 (drawn via f64 uniforms, cast),
/// evaluation runs in f64.
pub(crate) struct Teacher {
    in_dim: usize,
    out_dim: usize,
    w1: Vec<f32>, // [TEACHER_HIDDEN, in_dim] row-major
    b1: Vec<f32>,
    w2: Vec<f32>, // [out_dim, TEACHER_HIDDEN] row-major
}

impl Teacher {
    pub(crate) fn new(seed: u64, in_dim: usize, out_dim: usize) -> Self {
        let mut rng = Lcg64::new(seed_stream(seed, &[stream::DATA_TEACHER]));
        let w1 = (0..TEACHER_HIDDEN * in_dim)
            .map(|_| rng.uniform(-TEACHER_W1_AMP, TEACHER_W1_AMP) as f32)
            .collect();
        let b1 = (0..TEACHER_HIDDEN)
            .map(|_| rng.uniform(-TEACHER_B1_AMP, TEACHER_B1_AMP) as f32)
            .collect();
        let w2 = (0..out_dim * TEACHER_HIDDEN)
            .map(|_| rng.uniform(-TEACHER_W2_AMP, TEACHER_W2_AMP) as f32)
            .collect();
        Teacher {
            in_dim,
            out_dim,
            w1,
            b1,
            w2,
        }
    }

    pub(crate) fn eval(&self, x: &[f32]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim);
        let mut hidden = [0.0f64; TEACHER_HIDDEN];
        for h in 0..TEACHER_HIDDEN {
            let mut acc = self.b1[h] as f64;
            let row = &self.w1[h * self.in_dim..(h + 1) * self.in_dim];
            for (w, v) in row.iter().zip(x) {
                acc += *w as f64 * *v as f64;
            }
            hidden[h] = acc.tanh();
        }
        (0..self.out_dim)
            .map(|o| {
                let row = &self.w2[o * TEACHER_HIDDEN..(o + 1) * TEACHER_HIDDEN];
                row.iter().zip(hidden).map(|(w, h)| *w as f64 * h).sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Split,
    pub val: Split,
    pub test: Split,
}

/// Generates the three splits. Inputs and noise come from separate seed
/// streams, so e.g. changing `noise_std` to 0 leaves the inputs untouched.
pub fn make_dataset(cfg: &DatasetConfig) -> Result<Dataset> {
    cfg.validate()?;
    let teacher = Teacher::new(cfg.seed, cfg.in_dim, cfg.out_dim);
    let mut rng_in = Lcg64::new(seed_stream(cfg.seed, &[stream::DATA_INPUTS]));
    let mut rng_noise = Lcg64::new(seed_stream(cfg.seed, &[stream::DATA_NOISE]));

    let total = cfg
        .n_train
        .checked_add(cfg.n_val)
        .and_then(|n| n.checked_add(cfg.n_test))
        .filter(|n| n.checked_mul(cfg.in_dim.max(cfg.out_dim)).is_some())
        .ok_or_else(|| Error::config("dataset is too large"))?;
    let mut xs = Vec::with_capacity(total * cfg.in_dim);
    let mut ys = Vec::with_capacity(total * cfg.out_dim);
    let mut x_row = vec![0.0f32; cfg.in_dim];
    for _ in 0..total {
        for v in &mut x_row {
            *v = rng_in.uniform(-1.0, 1.0) as f32;
        }
        let y = teacher.eval(&x_row);
        xs.extend_from_slice(&x_row);
        for o in 0..cfg.out_dim {
            ys.push((y[o] + cfg.noise_std * rng_noise.normal()) as f32);
        }
    }

    let take = |n: usize, off: &mut usize| -> Result<Split> {
        let x = xs[*off * cfg.in_dim..(*off + n) * cfg.in_dim].to_vec();
        let y = ys[*off * cfg.out_dim..(*off + n) * cfg.out_dim].to_vec();
        *off += n;
        Split::new(
            Tensor::new(vec![n, cfg.in_dim], x)?,
            Tensor::new(vec![n, cfg.out_dim], y)?,
        )
    };
    let mut off = 0;
    Ok(Dataset {
        train: take(cfg.n_train, &mut off)?,
        val: take(cfg.n_val, &mut off)?,
        test: take(cfg.n_test, &mut off)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> DatasetConfig {
        DatasetConfig {
            n_train: 4,
            n_val: 2,
            n_test: 2,
            in_dim: 2,
            out_dim: 1,
            noise_std: 0.05,
            seed: 11,
        }
    }

    #[test]
    fn teacher_and_samples_are_frozen() {
        let t = Teacher::new(11, 2, 1);
        assert_eq!(t.w1[0], 0.4084167778491974);
        assert_eq!(t.w1[1], -0.32403913140296936);
        assert_eq!(t.b1[0], 0.041282862424850464);
        assert_eq!(t.w2[0], -0.5855048298835754);
        assert_eq!(t.w2[1], 0.5558192133903503);
        assert_eq!(t.w2[2], -0.1373492032289505);

        let ds = make_dataset(&small_cfg()).unwrap();
        assert_eq!(ds.train.inputs.row(0), &[0.70976788, -0.48163614]);
        assert_eq!(ds.train.targets.row(0), &[1.6908220052719116]);
        let clean = make_dataset(&DatasetConfig { noise_std: 0.0, ..small_cfg() }).unwrap();
        assert_eq!(clean.train.targets.row(0), &[1.712475061416626]);
        assert!(ds.train.inputs.bits_eq(&clean.train.inputs));
    }

    #[test]
    fn zero_noise_targets_reproduce_the_frozen_map() {
        let cfg = DatasetConfig {
            n_train: 64,
            n_val: 16,
            n_test: 16,
            noise_std: 0.0,
            seed: 123,
            ..Default::default()
        };
        let ds = make_dataset(&cfg).unwrap();
        let teacher = Teacher::new(cfg.seed, cfg.in_dim, cfg.out_dim);
        for (split, n) in [(&ds.train, 64), (&ds.val, 16), (&ds.test, 16)] {
            assert_eq!(split.len(), n);
            for r in 0..n {
                let y = teacher.eval(split.inputs.row(r));
                for (o, t) in split.targets.row(r).iter().enumerate() {
                    assert_eq!(*t, y[o] as f32);
                }
            }
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let cfg = DatasetConfig { seed: 5, ..small_cfg() };
        let a = make_dataset(&cfg).unwrap();
        let b = make_dataset(&cfg).unwrap();
        assert!(a.train.inputs.bits_eq(&b.train.inputs));
        assert!(a.train.targets.bits_eq(&b.train.targets));
        assert!(a.test.targets.bits_eq(&b.test.targets));
        let c = make_dataset(&DatasetConfig { seed: 6, ..small_cfg() }).unwrap();
        assert!(!a.train.inputs.bits_eq(&c.train.inputs));
    }

    #[test]
    fn inputs_stay_in_range_and_shapes_line_up() {
        let cfg = DatasetConfig {
            n_train: 100,
            n_val: 20,
            n_test: 30,
            in_dim: 5,
            out_dim: 2,
            noise_std: 0.01,
            seed: 3,
        };
        let ds = make_dataset(&cfg).unwrap();
        assert_eq!(ds.train.inputs.shape(), &[100, 5]);
        assert_eq!(ds.train.targets.shape(), &[100, 2]);
        assert_eq!(ds.val.inputs.shape(), &[20, 5]);
        assert_eq!(ds.test.targets.shape(), &[30, 2]);
        for split in [&ds.train, &ds.val, &ds.test] {
            for v in split.inputs.data() {
                assert!((-1.0..1.0).contains(v));
            }
        }
    }

    #[test]
    fn noise_magnitude_matches_noise_std() {
        // E|N(0, s)| = s * sqrt(2/pi).
        let clean_cfg = DatasetConfig {
            n_train: 2000,
            n_val: 1,
            n_test: 1,
            in_dim: 4,
            out_dim: 2,
            noise_std: 0.0,
            seed: 42,
        };
        let noisy_cfg = DatasetConfig { noise_std: 0.05, ..clean_cfg };
        let clean = make_dataset(&clean_cfg).unwrap();
        let noisy = make_dataset(&noisy_cfg).unwrap();
        let n = clean.train.targets.len();
        let mean_abs: f64 = clean
            .train
            .targets
            .data()
            .iter()
            .zip(noisy.train.targets.data())
            .map(|(a, b)| (*a as f64 - *b as f64).abs())
            .sum::<f64>()
            / n as f64;
        let expected = 0.05 * (2.0 / std::f64::consts::PI).sqrt();
        assert!(
            (mean_abs - expected).abs() < 0.005,
            "mean |noise| {mean_abs} vs {expected}"
        );
    }

    #[test]
    fn validation_errors() {
        assert!(make_dataset(&DatasetConfig { n_train: 0, ..small_cfg() }).is_err());
        assert!(make_dataset(&DatasetConfig { in_dim: 0, ..small_cfg() }).is_err());
        assert!(make_dataset(&DatasetConfig { noise_std: -0.1, ..small_cfg() }).is_err());
        assert!(make_dataset(&DatasetConfig { noise_std: f64::NAN, ..small_cfg() }).is_err());
    }
}
