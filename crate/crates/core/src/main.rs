//! prunekit command line: train and prune models, sweep schedule grids,
//! regenerate reports, and inspect or compare .pmk artifacts.
//!
//! Exit codes: 0 success; 2 configuration, format, usage, or I/O problems;
//! 3 numeric failure during training; 4 sweep finished but at least one
//! grid point failed.

use clap::{Parser, Subcommand};
use prunekit::config::{apply_seed, parse_experiment_config, parse_sweep_config};
use prunekit::data::make_dataset;
use prunekit::error::{Error, Result};
use prunekit::experiment::{run_experiment, run_sweep, ExperimentResult, TRACE_LEN};
use prunekit::model_io::{describe, load, ModelArtifact};
use prunekit::nn::loss::mae;
use prunekit::nn::model::{forward, Model};
use prunekit::report::{
    best_rows, fig_mae_vs_sparsity, fig_mae_vs_t0, fig_mae_vs_tf, fig_size_vs_sparsity,
    fig_trace, fig_trace_variants, fig_validation, parse_sweep_csv, report_markdown, sweep_csv,
    BestRows, SweepRow,
};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "prunekit",
    version,
    about = "Magnitude pruning experiments for small dense networks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a baseline and a pruned model, write the three artifacts
    Train {
        /// Run configuration file (key = value lines)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (PRUNEKIT_OUT overrides this flag)
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the configured run seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a schedule grid, write sweep.csv, report.md, and figure CSVs
    Sweep {
        /// Sweep configuration file (key = value lines)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (PRUNEKIT_OUT overrides this flag)
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the configured base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (overrides the config's parallelism key)
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Rebuild report.md and the scalar figure CSVs from an existing sweep.csv
    Report {
        /// Path to a sweep.csv produced by the sweep command
        #[arg(long)]
        from: PathBuf,
        /// Output directory (PRUNEKIT_OUT overrides this flag)
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the layout and statistics of a .pmk artifact
    Inspect {
        /// Artifact file
        artifact: PathBuf,
    },
    /// Evaluate two artifacts on the same test split and trace predictions
    Compare {
        /// First artifact
        a: PathBuf,
        /// Second artifact
        b: PathBuf,
        /// Run configuration supplying the dataset
        #[arg(long)]
        config: PathBuf,
        /// Output directory (PRUNEKIT_OUT overrides this flag)
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the configured run seed
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numeric(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Train { config, out, seed } => {
            cmd_train(&config, &resolve_out(&out), seed)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { config, out, seed, parallelism } => {
            let failures = cmd_sweep(&config, &resolve_out(&out), seed, parallelism)?;
            Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(4) })
        }
        Cmd::Report { from, out } => {
            cmd_report(&from, &resolve_out(&out))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Inspect { artifact } => {
            cmd_inspect(&artifact)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Compare { a, b, config, out, seed } => {
            cmd_compare(&a, &b, &config, &resolve_out(&out), seed)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// The PRUNEKIT_OUT environment variable wins over the --out flag.
fn resolve_out(flag: &Path) -> PathBuf {
    std::env::var_os("PRUNEKIT_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| flag.to_path_buf())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))
}

/// Write-to-temp then rename, so failures never leave partial files.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    std::io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(dir.join(name))
        .map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn write_artifact(dir: &Path, artifact: &ModelArtifact) -> Result<()> {
    let stem = artifact.variant.stem();
    write_atomic(dir, &format!("{stem}.pmk"), &artifact.payload)?;
    write_atomic(dir, &format!("{stem}.pmk.gz"), &artifact.gzip)
}

fn print_variant(label: &str, mae: f64, raw: usize, gz: usize) {
    println!("{label:<10} mae {mae:.6}  raw {raw} B  gzip {gz} B");
}

fn cmd_train(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut cfg = parse_experiment_config(&read_to_string(config)?)?;
    if let Some(s) = seed {
        apply_seed(&mut cfg, s);
    }
    println!("effective seed: {}", cfg.seed);

    let result = run_experiment(&cfg)?;
    write_artifact(out, &result.dense_artifact)?;
    write_artifact(out, &result.sparse_artifact)?;
    write_artifact(out, &result.quant_artifact)?;
    write_atomic(out, "result.csv", sweep_csv(std::slice::from_ref(&result))?.as_bytes())?;

    println!("baseline   mae {:.6}", result.baseline_mae);
    print_variant("pruned", result.pruned.test_mae, result.pruned.raw_size, result.pruned.gzip_size);
    print_variant("sparse", result.sparse.test_mae, result.sparse.raw_size, result.sparse.gzip_size);
    print_variant(
        "quantized",
        result.quantized.test_mae,
        result.quantized.raw_size,
        result.quantized.gzip_size,
    );
    println!("achieved sparsity: {:.6}", result.achieved_sparsity);
    println!(
        "wrote pruned.pmk, sparse.pmk, quant.pmk (+ .pmk.gz) and result.csv to {}",
        out.display()
    );
    Ok(())
}

fn print_best(best: &[BestRows]) {
    for b in best {
        for (label, row) in [("best accuracy", &b.best_accuracy), ("best size", &b.best_size)] {
            println!(
                "{} {label}: s_i={} s_f={} t0={} tf={} mae_pruned={:.6} size_sparse_gz={} B",
                row.kind.name(),
                row.s_i,
                row.s_f,
                row.t0,
                row.tf,
                row.mae_pruned,
                row.size_sparse_gz,
            );
        }
    }
}

/// Figure emitters reject axes the grid never covered; those figures are
/// skipped with a note instead of failing the sweep.
fn write_fig(dir: &Path, name: &str, fig: Result<String>) -> Result<()> {
    match fig {
        Ok(text) => write_atomic(dir, name, text.as_bytes()),
        Err(Error::Usage(msg)) => {
            eprintln!("skipping {name}: {msg}");
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn cmd_sweep(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    parallelism: Option<usize>,
) -> Result<u32> {
    let (mut cfg, grid, config_par) = parse_sweep_config(&read_to_string(config)?)?;
    if let Some(s) = seed {
        apply_seed(&mut cfg, s);
    }
    let parallelism = parallelism.unwrap_or(config_par);
    println!("effective seed: {}", cfg.seed);

    let outcomes = run_sweep(&grid, &cfg, parallelism)?;
    let total = outcomes.len();
    let mut results: Vec<ExperimentResult> = Vec::new();
    let mut failures = 0u32;
    for o in outcomes {
        match o.outcome {
            Ok(r) => results.push(r),
            Err(e) => {
                failures += 1;
                let p = o.point;
                eprintln!(
                    "point {} s_i={} s_f={} t0={} tf={} failed: {e}",
                    p.kind.name(),
                    p.s_i,
                    p.s_f,
                    p.t0,
                    p.tf
                );
            }
        }
    }
    println!("{} of {total} grid points completed", results.len());

    if !results.is_empty() {
        let rows: Vec<SweepRow> = results.iter().map(SweepRow::from_result).collect();
        write_atomic(out, "sweep.csv", sweep_csv(&results)?.as_bytes())?;
        write_atomic(out, "report.md", report_markdown(&rows)?.as_bytes())?;
        write_fig(out, "fig_size_vs_sparsity.csv", fig_size_vs_sparsity(&rows))?;
        write_fig(out, "fig_mae_vs_sparsity.csv", fig_mae_vs_sparsity(&rows))?;
        write_fig(out, "fig_mae_vs_t0.csv", fig_mae_vs_t0(&rows))?;
        write_fig(out, "fig_mae_vs_tf.csv", fig_mae_vs_tf(&rows))?;
        write_fig(out, "fig_validation.csv", fig_validation(&results))?;
        write_fig(out, "fig_trace.csv", fig_trace(&results))?;
        write_fig(out, "fig_trace_variants.csv", fig_trace_variants(&results))?;
        print_best(&best_rows(&rows));
        println!("wrote sweep.csv, report.md and figure CSVs to {}", out.display());
    }
    Ok(failures)
}

fn cmd_report(from: &Path, out: &Path) -> Result<()> {
    let rows = parse_sweep_csv(&read_to_string(from)?)?;
    write_atomic(out, "report.md", report_markdown(&rows)?.as_bytes())?;
    write_fig(out, "fig_size_vs_sparsity.csv", fig_size_vs_sparsity(&rows))?;
    write_fig(out, "fig_mae_vs_sparsity.csv", fig_mae_vs_sparsity(&rows))?;
    write_fig(out, "fig_mae_vs_t0.csv", fig_mae_vs_t0(&rows))?;
    write_fig(out, "fig_mae_vs_tf.csv", fig_mae_vs_tf(&rows))?;
    print_best(&best_rows(&rows));
    println!("wrote report.md and scalar figure CSVs to {}", out.display());
    Ok(())
}

fn cmd_inspect(artifact: &Path) -> Result<()> {
    let bytes = read_bytes(artifact)?;
    let info = describe(&bytes)?;
    let gzip_len = prunekit::model_io::gzip_size(&bytes);
    println!("{}: {} artifact", artifact.display(), info.variant);
    println!("raw {} B, gzip {} B, {} layers", bytes.len(), gzip_len, info.layers.len());
    let mut zeros = 0.0f64;
    let mut total = 0.0f64;
    for l in &info.layers {
        let n = (l.out_dim * l.in_dim) as f64;
        zeros += l.zero_fraction * n;
        total += n;
        let mut line = format!(
            "  {}: [{} x {}] {}  zero fraction {:.6}",
            l.name, l.out_dim, l.in_dim, l.encoding, l.zero_fraction
        );
        if let (Some(scale), Some(zp)) = (l.scale, l.zero_point) {
            let _ = write!(line, "  scale {scale:e}  zero_point {zp}");
        }
        println!("{line}");
    }
    println!("global weight sparsity: {:.6}", zeros / total);
    Ok(())
}

fn eval_artifact(path: &Path) -> Result<Model> {
    load(&read_bytes(path)?)?.into_model()
}

fn cmd_compare(a: &Path, b: &Path, config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut cfg = parse_experiment_config(&read_to_string(config)?)?;
    if let Some(s) = seed {
        apply_seed(&mut cfg, s);
    }
    println!("effective seed: {}", cfg.seed);

    let model_a = eval_artifact(a)?;
    let model_b = eval_artifact(b)?;
    let dataset = make_dataset(&cfg.dataset)?;
    let test = &dataset.test;
    if test.len() < TRACE_LEN {
        return Err(Error::config(format!(
            "n_test {} cannot fill the {TRACE_LEN}-sample prediction trace",
            test.len()
        )));
    }

    let pred_a = forward(&model_a, &test.inputs)?;
    let pred_b = forward(&model_b, &test.inputs)?;
    let mae_a = mae(&pred_a, &test.targets)?;
    let mae_b = mae(&pred_b, &test.targets)?;
    println!("{}: test mae {:.6}", a.display(), mae_a);
    println!("{}: test mae {:.6}", b.display(), mae_b);

    let mut csv = String::from("sample,true,model_a,model_b\r\n");
    let mut max_dev = 0.0f64;
    for i in 0..TRACE_LEN {
        let (ya, yb) = (pred_a.row(i)[0] as f64, pred_b.row(i)[0] as f64);
        max_dev = max_dev.max((ya - yb).abs());
        let _ = writeln!(csv, "{i},{},{ya},{yb}\r", test.targets.row(i)[0]);
    }
    println!("max trace deviation: {max_dev:e}");
    write_atomic(out, "compare_trace.csv", csv.as_bytes())?;
    println!("wrote compare_trace.csv to {}", out.display());
    Ok(())
}
