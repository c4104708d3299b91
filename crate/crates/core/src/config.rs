//! Plain-text `key = value` configuration files.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment (whole
//! line or trailing); blank lines are ignored; whitespace around keys and
//! values is trimmed; list values are comma-separated. Every key is
//! optional and falls back to the built-in default. Unknown and duplicate
//! keys are errors, reported with their line number.
//!
//! Experiment keys (single runs):
//!   n_train, n_val, n_test, in_dim, out_dim, noise_std, data_seed,
//!   hidden_dims, lr, batch_size, epochs, plateau_patience, plateau_factor,
//!   plateau_min_lr, shuffle (on|off), excluded_layers, seed,
//!   schedule (constant|dynamic), s_i, s_f, t0, tf, delta_t
//!
//! Sweep keys (grid runs) replace the schedule keys:
//!   sweep_kinds, sweep_final_sparsities, sweep_initial_sparsities,
//!   sweep_start_epochs, sweep_end_epochs, sweep_delta_t, parallelism

use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, ScheduleKind, SweepGrid};
use crate::nn::train::Shuffle;
use crate::prune::PruningSchedule;
use crate::rng::{seed_stream, stream};
use std::collections::HashSet;

fn parse_lines(text: &str) -> Result<Vec<(usize, &str, &str)>> {
    let mut entries = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(Error::config(format!(
                "config line {lineno}: expected 'key = value', found '{line}'"
            )));
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        if key.is_empty() {
            return Err(Error::config(format!("config line {lineno}: missing key before '='")));
        }
        if !seen.insert(key) {
            return Err(Error::config(format!("config line {lineno}: duplicate key '{key}'")));
        }
        entries.push((lineno, key, value));
    }
    Ok(entries)
}

fn bad_value(lineno: usize, key: &str, value: &str, want: &str) -> Error {
    Error::config(format!(
        "config line {lineno}: value '{value}' for key '{key}' is not {want}"
    ))
}

fn parse_int<T: std::str::FromStr>(lineno: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad_value(lineno, key, value, "a nonnegative integer"))
}

fn parse_usize(lineno: usize, key: &str, value: &str) -> Result<usize> {
    parse_int(lineno, key, value)
}

fn parse_u64(lineno: usize, key: &str, value: &str) -> Result<u64> {
    parse_int(lineno, key, value)
}

fn parse_f64(lineno: usize, key: &str, value: &str) -> Result<f64> {
    let v: f64 = value.parse().map_err(|_| bad_value(lineno, key, value, "a number"))?;
    if !v.is_finite() {
        return Err(bad_value(lineno, key, value, "a finite number"));
    }
    Ok(v)
}

/// Empty value means empty list.
fn split_list(value: &str) -> Vec<&str> {
    if value.is_empty() {
        return vec![];
    }
    value.split(',').map(str::trim).collect()
}

fn parse_usize_list(lineno: usize, key: &str, value: &str) -> Result<Vec<usize>> {
    split_list(value)
        .into_iter()
        .map(|v| parse_usize(lineno, key, v))
        .collect()
}

fn parse_f64_list(lineno: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    split_list(value)
        .into_iter()
        .map(|v| parse_f64(lineno, key, v))
        .collect()
}

/// Applies one common (non-schedule, non-sweep) key. Returns false if the
/// key is not a common key.
fn apply_common_key(
    cfg: &mut ExperimentConfig,
    shuffle_on: &mut bool,
    lineno: usize,
    key: &str,
    value: &str,
) -> Result<bool> {
    match key {
        "n_train" => cfg.dataset.n_train = parse_usize(lineno, key, value)?,
        "n_val" => cfg.dataset.n_val = parse_usize(lineno, key, value)?,
        "n_test" => cfg.dataset.n_test = parse_usize(lineno, key, value)?,
        "in_dim" => cfg.dataset.in_dim = parse_usize(lineno, key, value)?,
        "out_dim" => cfg.dataset.out_dim = parse_usize(lineno, key, value)?,
        "noise_std" => cfg.dataset.noise_std = parse_f64(lineno, key, value)?,
        "data_seed" => cfg.dataset.seed = parse_u64(lineno, key, value)?,
        "hidden_dims" => cfg.hidden_dims = parse_usize_list(lineno, key, value)?,
        "lr" => cfg.train.lr = parse_f64(lineno, key, value)?,
        "batch_size" => cfg.train.batch_size = parse_usize(lineno, key, value)?,
        "epochs" => cfg.train.epochs = parse_usize(lineno, key, value)?,
        "plateau_patience" => cfg.train.plateau.patience = parse_int(lineno, key, value)?,
        "plateau_factor" => cfg.train.plateau.factor = parse_f64(lineno, key, value)?,
        "plateau_min_lr" => cfg.train.plateau.min_lr = parse_f64(lineno, key, value)?,
        "shuffle" => {
            *shuffle_on = match value {
                "on" => true,
                "off" => false,
                _ => return Err(bad_value(lineno, key, value, "'on' or 'off'")),
            }
        }
        "excluded_layers" => {
            cfg.excluded_layers = split_list(value).into_iter().map(String::from).collect()
        }
        "seed" => cfg.seed = parse_u64(lineno, key, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

/// Re-derives the seed-dependent parts of a config after `seed` is known:
/// the shuffle stream when shuffling is on. Also used by the CLI seed
/// override.
pub fn apply_seed(cfg: &mut ExperimentConfig, seed: u64) {
    cfg.seed = seed;
    if let Shuffle::Seeded(_) = cfg.train.shuffle {
        cfg.train.shuffle = Shuffle::Seeded(seed_stream(seed, &[stream::SHUFFLE]));
    }
}

/// Parses a single-run configuration. Every missing key keeps its default.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut shuffle_on = false;
    let (mut kind, mut s_i, mut s_f, mut t0, mut tf, mut delta_t) =
        (ScheduleKind::Dynamic, 0.0f64, 0.5f64, 0usize, 60usize, 1usize);
    for (lineno, key, value) in parse_lines(text)? {
        if apply_common_key(&mut cfg, &mut shuffle_on, lineno, key, value)? {
            continue;
        }
        match key {
            "schedule" => {
                kind = match value {
                    "constant" => ScheduleKind::Constant,
                    "dynamic" => ScheduleKind::Dynamic,
                    _ => return Err(bad_value(lineno, key, value, "'constant' or 'dynamic'")),
                }
            }
            "s_i" => s_i = parse_f64(lineno, key, value)?,
            "s_f" => s_f = parse_f64(lineno, key, value)?,
            "t0" => t0 = parse_usize(lineno, key, value)?,
            "tf" => tf = parse_usize(lineno, key, value)?,
            "delta_t" => delta_t = parse_usize(lineno, key, value)?,
            _ if key.starts_with("sweep_") || key == "parallelism" => {
                return Err(Error::config(format!(
                    "config line {lineno}: key '{key}' belongs to sweep configs"
                )))
            }
            _ => {
                return Err(Error::config(format!("config line {lineno}: unknown key '{key}'")))
            }
        }
    }
    cfg.schedule = match kind {
        ScheduleKind::Constant => PruningSchedule::constant(s_f, t0, tf, delta_t)?,
        ScheduleKind::Dynamic => PruningSchedule::dynamic(s_i, s_f, t0, tf, delta_t)?,
    };
    if shuffle_on {
        cfg.train.shuffle = Shuffle::Seeded(0);
    }
    let seed = cfg.seed;
    apply_seed(&mut cfg, seed);
    Ok(cfg)
}

/// Parses a sweep configuration: the shared run settings, the grid, and the
/// worker count (default 1).
pub fn parse_sweep_config(text: &str) -> Result<(ExperimentConfig, SweepGrid, usize)> {
    let mut cfg = ExperimentConfig::default();
    let mut shuffle_on = false;
    let mut grid = SweepGrid::default();
    let mut parallelism = 1usize;
    for (lineno, key, value) in parse_lines(text)? {
        if apply_common_key(&mut cfg, &mut shuffle_on, lineno, key, value)? {
            continue;
        }
        match key {
            "sweep_kinds" => {
                grid.kinds = split_list(value)
                    .into_iter()
                    .map(|v| match v {
                        "constant" => Ok(ScheduleKind::Constant),
                        "dynamic" => Ok(ScheduleKind::Dynamic),
                        _ => Err(bad_value(lineno, key, v, "'constant' or 'dynamic'")),
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            "sweep_final_sparsities" => {
                grid.final_sparsities = parse_f64_list(lineno, key, value)?
            }
            "sweep_initial_sparsities" => {
                grid.initial_sparsities = parse_f64_list(lineno, key, value)?
            }
            "sweep_start_epochs" => grid.start_epochs = parse_usize_list(lineno, key, value)?,
            "sweep_end_epochs" => grid.end_epochs = parse_usize_list(lineno, key, value)?,
            "sweep_delta_t" => grid.delta_t = parse_usize(lineno, key, value)?,
            "parallelism" => {
                parallelism = parse_usize(lineno, key, value)?;
                if parallelism == 0 {
                    return Err(bad_value(lineno, key, value, "at least 1"));
                }
            }
            "schedule" | "s_i" | "s_f" | "t0" | "tf" | "delta_t" => {
                return Err(Error::config(format!(
                    "config line {lineno}: key '{key}' belongs to single-run configs; \
sweep grids use the sweep_* keys"
                )))
            }
            _ => {
                return Err(Error::config(format!("config line {lineno}: unknown key '{key}'")))
            }
        }
    }
    if shuffle_on {
        cfg.train.shuffle = Shuffle::Seeded(0);
    }
    let seed = cfg.seed;
    apply_seed(&mut cfg, seed);
    Ok((cfg, grid, parallelism))
}
