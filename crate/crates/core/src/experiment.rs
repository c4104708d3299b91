//! End-to-end experiment runs: train an unpruned baseline and a pruned model
//! from the same initialization, emit dense/sparse/quantized artifacts, and
//! measure test MAE and compressed size for each. A sweep crosses schedule
//! parameters over a grid and collects one result per point.

use crate::data::{make_dataset, Dataset, DatasetConfig};
use crate::error::{Error, Result};
use crate::model_io::{
    dequantize, load, quantize, serialize_dense, serialize_quantized, serialize_sparse,
    LoadedModel, ModelArtifact, Variant,
};
use crate::nn::loss::mae;
use crate::nn::model::{forward, init_model, Activation, LayerSpec};
use crate::nn::train::{train, Shuffle, TrainParams};
use crate::prune::{achieved_sparsity, run_pruned_training, PruneRunConfig, PruningSchedule};
use crate::rng::{seed_stream, stream};
use crate::tensor::Tensor;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Number of test samples captured in every prediction trace.
pub const TRACE_LEN: usize = 20;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    /// Hidden layer widths; the model is in_dim -> hidden... -> out_dim with
    /// relu hidden layers and an identity output layer, all prunable.
    pub hidden_dims: Vec<usize>,
    pub train: TrainParams,
    pub schedule: PruningSchedule,
    pub excluded_layers: Vec<String>,
    /// Run seed; weight initialization derives from it. The dataset has its
    /// own seed so the data can stay fixed while runs vary.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetConfig::default(),
            hidden_dims: vec![64, 64],
            train: TrainParams::default(),
            schedule: PruningSchedule::Dynamic {
                s_i: 0.0,
                s_f: 0.5,
                t0: 0,
                tf: 60,
                delta_t: 1,
            },
            excluded_layers: vec![],
            seed: 17,
        }
    }
}

impl ExperimentConfig {
    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        let mut specs = Vec::with_capacity(self.hidden_dims.len() + 1);
        let mut in_dim = self.dataset.in_dim;
        for (i, &h) in self.hidden_dims.iter().enumerate() {
            specs.push(LayerSpec::new(format!("hidden{i}"), in_dim, h, Activation::Relu, true));
            in_dim = h;
        }
        specs.push(LayerSpec::new(
            "output",
            in_dim,
            self.dataset.out_dim,
            Activation::Identity,
            true,
        ));
        specs
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        self.train.validate()?;
        self.schedule.validate()?;
        if self.hidden_dims.iter().any(|h| *h == 0) {
            return Err(Error::config("hidden layer widths must be positive"));
        }
        if self.dataset.n_train < self.train.batch_size {
            return Err(Error::config(format!(
                "n_train {} is smaller than the batch size {}",
                self.dataset.n_train, self.train.batch_size
            )));
        }
        if self.dataset.n_test < TRACE_LEN {
            return Err(Error::config(format!(
                "n_test {} cannot fill the {TRACE_LEN}-sample prediction trace",
                self.dataset.n_test
            )));
        }
        if self.schedule.tf() > self.train.epochs {
            return Err(Error::config(format!(
                "pruning window end {} exceeds total epochs {}",
                self.schedule.tf(),
                self.train.epochs
            )));
        }
        let specs = self.layer_specs();
        for name in &self.excluded_layers {
            if !specs.iter().any(|s| &s.name == name) {
                return Err(Error::config(format!("excluded layer '{name}' does not exist")));
            }
        }
        Ok(())
    }

    fn init_seed(&self) -> u64 {
        seed_stream(self.seed, &[stream::MODEL_INIT])
    }
}

/// Test MAE plus artifact sizes for one encoding of the pruned model.
#[derive(Debug, Clone, Copy)]
pub struct VariantMetrics {
    pub test_mae: f64,
    pub raw_size: usize,
    pub gzip_size: usize,
}

/// First output component of the first [`TRACE_LEN`] test samples, for every
/// model involved in a run.
#[derive(Debug, Clone)]
pub struct PredictionTrace {
    pub truth: Vec<f64>,
    pub baseline: Vec<f64>,
    pub pruned: Vec<f64>,
    pub sparse: Vec<f64>,
    pub quantized: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub baseline_mae: f64,
    pub pruned: VariantMetrics,
    pub sparse: VariantMetrics,
    pub quantized: VariantMetrics,
    /// Global zero fraction over the pruned layers' weights.
    pub achieved_sparsity: f64,
    pub baseline_curve: Vec<f64>,
    /// Validation MAE per epoch of the pruned run.
    pub val_curve: Vec<f64>,
    /// Achieved sparsity per epoch of the pruned run.
    pub sparsity_curve: Vec<f64>,
    pub trace: PredictionTrace,
    pub dense_artifact: ModelArtifact,
    pub sparse_artifact: ModelArtifact,
    pub quant_artifact: ModelArtifact,
    pub wall_time: Duration,
}

fn trace_column(pred: &Tensor) -> Vec<f64> {
    (0..TRACE_LEN).map(|r| pred.row(r)[0] as f64).collect()
}

/// Runs one experiment against an already-built dataset. The dataset must
/// come from `cfg.dataset`; sweeps share one dataset across points.
pub(crate) fn run_with_dataset(cfg: &ExperimentConfig, dataset: &Dataset) -> Result<ExperimentResult> {
    cfg.validate()?;
    let started = Instant::now();
    let init = init_model(&cfg.layer_specs(), cfg.init_seed())?;

    let mut baseline = init.clone();
    let baseline_curve = train(&mut baseline, &dataset.train, &dataset.val, &cfg.train)?;
    let test = &dataset.test;
    let baseline_pred = forward(&baseline, &test.inputs)?;
    let baseline_mae = mae(&baseline_pred, &test.targets)?;

    let mut pruned = init;
    let prune_cfg = PruneRunConfig {
        schedule: cfg.schedule,
        total_epochs: cfg.train.epochs,
        excluded_layers: cfg.excluded_layers.clone(),
    };
    let (masks, log) =
        run_pruned_training(&mut pruned, &prune_cfg, &dataset.train, &dataset.val, &cfg.train)?;

    let pruned_pred = forward(&pruned, &test.inputs)?;
    let pruned_mae = mae(&pruned_pred, &test.targets)?;

    let dense_artifact = ModelArtifact::new(Variant::PrunedDense, serialize_dense(&pruned)?);
    let sparse_artifact = ModelArtifact::new(Variant::SparseOptimized, serialize_sparse(&pruned)?);
    let sparse_model = match load(&sparse_artifact.payload)? {
        LoadedModel::F32(m) => m,
        LoadedModel::Quantized(_) => unreachable!("sparse artifacts decode to f32"),
    };
    let sparse_pred = forward(&sparse_model, &test.inputs)?;
    let sparse_mae = mae(&sparse_pred, &test.targets)?;

    let qmodel = quantize(&pruned)?;
    let quant_artifact = ModelArtifact::new(Variant::Quantized, serialize_quantized(&qmodel)?);
    let deq = dequantize(&qmodel)?;
    let quant_pred = forward(&deq, &test.inputs)?;
    let quant_mae = mae(&quant_pred, &test.targets)?;

    let masked_names = masks.masked_layer_names(&pruned);
    let achieved = achieved_sparsity(&pruned, &masked_names)?.global;

    let metrics = |test_mae: f64, a: &ModelArtifact| VariantMetrics {
        test_mae,
        raw_size: a.raw_size(),
        gzip_size: a.gzip_size(),
    };
    Ok(ExperimentResult {
        config: cfg.clone(),
        baseline_mae,
        pruned: metrics(pruned_mae, &dense_artifact),
        sparse: metrics(sparse_mae, &sparse_artifact),
        quantized: metrics(quant_mae, &quant_artifact),
        achieved_sparsity: achieved,
        baseline_curve,
        val_curve: log.val_mae,
        sparsity_curve: log.sparsity,
        trace: PredictionTrace {
            truth: (0..TRACE_LEN).map(|r| test.targets.row(r)[0] as f64).collect(),
            baseline: trace_column(&baseline_pred),
            pruned: trace_column(&pruned_pred),
            sparse: trace_column(&sparse_pred),
            quantized: trace_column(&quant_pred),
        },
        dense_artifact,
        sparse_artifact,
        quant_artifact,
        wall_time: started.elapsed(),
    })
}

/// Runs one full experiment: baseline training, pruned training, artifact
/// encoding, and evaluation. Deterministic in `cfg` (wall time aside).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let dataset = make_dataset(&cfg.dataset)?;
    run_with_dataset(cfg, &dataset)
}

/// Which schedule family a grid point uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScheduleKind {
    Constant,
    Dynamic,
}

impl ScheduleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Constant => "constant",
            ScheduleKind::Dynamic => "dynamic",
        }
    }
}

/// Sweep axes. Constant schedules take each final sparsity as their constant
/// level (initial sparsities apply to dynamic schedules only). Pairs with
/// `t0 >= tf` are geometrically invalid and skipped during enumeration.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub kinds: Vec<ScheduleKind>,
    pub final_sparsities: Vec<f64>,
    pub initial_sparsities: Vec<f64>,
    pub start_epochs: Vec<usize>,
    pub end_epochs: Vec<usize>,
    pub delta_t: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            kinds: vec![ScheduleKind::Constant, ScheduleKind::Dynamic],
            final_sparsities: vec![0.5, 0.75, 0.875],
            initial_sparsities: vec![0.0],
            start_epochs: vec![0, 20, 40, 60, 80],
            end_epochs: vec![20, 40, 60, 80],
            delta_t: 1,
        }
    }
}

/// One point of the sweep grid. For constant schedules `s_i == s_f == s_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub kind: ScheduleKind,
    pub s_i: f64,
    pub s_f: f64,
    pub t0: usize,
    pub tf: usize,
}

impl GridPoint {
    pub fn schedule(&self, delta_t: usize) -> Result<PruningSchedule> {
        match self.kind {
            ScheduleKind::Constant => PruningSchedule::constant(self.s_f, self.t0, self.tf, delta_t),
            ScheduleKind::Dynamic => {
                PruningSchedule::dynamic(self.s_i, self.s_f, self.t0, self.tf, delta_t)
            }
        }
    }
}

/// Per-point run seed: a hash of the base seed and the grid coordinates, so
/// points are seeded independently but the whole sweep is a pure function of
/// the base seed.
pub fn point_seed(base_seed: u64, point: &GridPoint) -> u64 {
    let kind_code = match point.kind {
        ScheduleKind::Constant => 0u64,
        ScheduleKind::Dynamic => 1u64,
    };
    seed_stream(
        base_seed,
        &[
            stream::SWEEP_POINT,
            kind_code,
            point.s_i.to_bits(),
            point.s_f.to_bits(),
            point.t0 as u64,
            point.tf as u64,
        ],
    )
}

/// Expands the grid in canonical order: kind, then s_f, then s_i, then t0,
/// then tf, each ascending. Axis values are deduplicated. Errors if any
/// value is out of range, if an end epoch exceeds the training horizon, or
/// if no valid point remains.
pub fn enumerate_grid(grid: &SweepGrid, total_epochs: usize) -> Result<Vec<GridPoint>> {
    if grid.delta_t == 0 {
        return Err(Error::config("mask update cadence delta_t must be at least 1"));
    }
    let mut kinds = grid.kinds.clone();
    kinds.sort_unstable();
    kinds.dedup();
    if kinds.is_empty() {
        return Err(Error::config("sweep axis kind is empty"));
    }
    let dedup_f64 = |name: &str, vals: &[f64]| -> Result<Vec<f64>> {
        if vals.is_empty() {
            return Err(Error::config(format!("sweep axis {name} is empty")));
        }
        for v in vals {
            if !v.is_finite() || !(0.0..1.0).contains(v) {
                return Err(Error::config(format!("sweep {name} value {v} must be in [0, 1)")));
            }
        }
        let mut vals = vals.to_vec();
        vals.sort_unstable_by(f64::total_cmp);
        vals.dedup();
        Ok(vals)
    };
    let finals = dedup_f64("final sparsity", &grid.final_sparsities)?;
    let initials = dedup_f64("initial sparsity", &grid.initial_sparsities)?;
    let dedup_usize = |name: &str, vals: &[usize]| -> Result<Vec<usize>> {
        if vals.is_empty() {
            return Err(Error::config(format!("sweep axis {name} is empty")));
        }
        let mut vals = vals.to_vec();
        vals.sort_unstable();
        vals.dedup();
        Ok(vals)
    };
    let starts = dedup_usize("start epoch", &grid.start_epochs)?;
    let ends = dedup_usize("end epoch", &grid.end_epochs)?;
    for &tf in &ends {
        if tf > total_epochs {
            return Err(Error::config(format!(
                "sweep end epoch {tf} exceeds total epochs {total_epochs}"
            )));
        }
    }

    let mut points = Vec::new();
    for &kind in &kinds {
        for &s_f in &finals {
            let s_is: &[f64] = match kind {
                // Constant schedules have no independent initial sparsity.
                ScheduleKind::Constant => std::slice::from_ref(&s_f),
                ScheduleKind::Dynamic => &initials,
            };
            for &s_i in s_is {
                if kind == ScheduleKind::Dynamic && s_i > s_f {
                    continue;
                }
                for &t0 in &starts {
                    for &tf in &ends {
                        if t0 >= tf {
                            continue;
                        }
                        points.push(GridPoint { kind, s_i, s_f, t0, tf });
                    }
                }
            }
        }
    }
    if points.is_empty() {
        return Err(Error::usage("sweep grid is empty: no valid (t0, tf) pair"));
    }
    Ok(points)
}

/// Outcome of one grid point; failures are recorded, they do not abort the
/// sweep.
#[derive(Debug)]
pub struct SweepPointResult {
    pub point: GridPoint,
    pub outcome: Result<ExperimentResult>,
}

/// Runs every grid point over `base` with the point's schedule and a
/// per-point seed from [`point_seed`]. The dataset is built once from
/// `base.dataset` and shared, so every point trains on the same data.
/// Results come back in canonical grid order no matter how many worker
/// threads run, so sweep output is byte-reproducible across parallelism
/// levels.
pub fn run_sweep(
    grid: &SweepGrid,
    base: &ExperimentConfig,
    parallelism: usize,
) -> Result<Vec<SweepPointResult>> {
    let points = enumerate_grid(grid, base.train.epochs)?;
    let configs: Vec<ExperimentConfig> = points
        .iter()
        .map(|p| {
            let mut cfg = ExperimentConfig {
                schedule: p.schedule(grid.delta_t)?,
                seed: point_seed(base.seed, p),
                ..base.clone()
            };
            // Shuffle order follows the per-point seed, like initialization.
            if let Shuffle::Seeded(_) = cfg.train.shuffle {
                cfg.train.shuffle = Shuffle::Seeded(seed_stream(cfg.seed, &[stream::SHUFFLE]));
            }
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    // Systemic problems (dataset, model, optimizer config) fail the whole
    // sweep up front; per-point failures are recorded per point.
    configs[0].validate()?;
    let dataset = make_dataset(&base.dataset)?;

    let workers = parallelism.max(1).min(points.len());
    let mut slots: Vec<Option<SweepPointResult>> = Vec::new();
    slots.resize_with(points.len(), || None);
    if workers == 1 {
        for (i, cfg) in configs.iter().enumerate() {
            slots[i] = Some(SweepPointResult {
                point: points[i],
                outcome: run_with_dataset(cfg, &dataset),
            });
        }
    } else {
        let next = AtomicUsize::new(0);
        let slots_mx = Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= configs.len() {
                        break;
                    }
                    let result = SweepPointResult {
                        point: points[i],
                        outcome: run_with_dataset(&configs[i], &dataset),
                    };
                    slots_mx.lock().unwrap()[i] = Some(result);
                });
            }
        });
    }
    Ok(slots
        .into_iter()
        .map(|s| s.expect("every sweep slot is filled"))
        .collect())
}
