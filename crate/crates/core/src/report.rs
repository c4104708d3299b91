//! Report emitters: the sweep result table as CSV, a Markdown table of the
//! best rows per schedule kind, and per-figure CSV series. All CSV output
//! uses CRLF line endings, UTF-8, and '.' as the decimal separator; fields
//! never need quoting. Emitters are pure string builders so callers own all
//! file I/O.

use crate::error::{Error, Result};
use crate::experiment::{ExperimentResult, ScheduleKind};
use crate::prune::PruningSchedule;
use std::fmt::Write as _;

pub const SWEEP_HEADER: &str = "schedule_kind,s_i,s_f,t0,tf,mae_pruned,size_pruned_gz,\
mae_sparse,size_sparse_gz,mae_quant,size_quant_gz,achieved_sparsity,baseline_mae";

const CRLF: &str = "\r\n";

/// One sweep table row. For constant schedules `s_i == s_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kind: ScheduleKind,
    pub s_i: f64,
    pub s_f: f64,
    pub t0: usize,
    pub tf: usize,
    pub mae_pruned: f64,
    pub size_pruned_gz: usize,
    pub mae_sparse: f64,
    pub size_sparse_gz: usize,
    pub mae_quant: f64,
    pub size_quant_gz: usize,
    pub achieved_sparsity: f64,
    pub baseline_mae: f64,
}

impl SweepRow {
    pub fn from_result(r: &ExperimentResult) -> Self {
        let (kind, s_i) = match r.config.schedule {
            PruningSchedule::Constant { s_c, .. } => (ScheduleKind::Constant, s_c),
            PruningSchedule::Dynamic { s_i, .. } => (ScheduleKind::Dynamic, s_i),
        };
        SweepRow {
            kind,
            s_i,
            s_f: r.config.schedule.final_sparsity(),
            t0: r.config.schedule.t0(),
            tf: r.config.schedule.tf(),
            mae_pruned: r.pruned.test_mae,
            size_pruned_gz: r.pruned.gzip_size,
            mae_sparse: r.sparse.test_mae,
            size_sparse_gz: r.sparse.gzip_size,
            mae_quant: r.quantized.test_mae,
            size_quant_gz: r.quantized.gzip_size,
            achieved_sparsity: r.achieved_sparsity,
            baseline_mae: r.baseline_mae,
        }
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.kind.name(),
            self.s_i,
            self.s_f,
            self.t0,
            self.tf,
            self.mae_pruned,
            self.size_pruned_gz,
            self.mae_sparse,
            self.size_sparse_gz,
            self.mae_quant,
            self.size_quant_gz,
            self.achieved_sparsity,
            self.baseline_mae,
        )
    }
}

fn rows_from(results: &[ExperimentResult]) -> Result<Vec<SweepRow>> {
    if results.is_empty() {
        return Err(Error::usage("no results to report"));
    }
    Ok(results.iter().map(SweepRow::from_result).collect())
}

pub fn sweep_csv_from_rows(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::usage("no results to report"));
    }
    let mut out = String::from(SWEEP_HEADER);
    out.push_str(CRLF);
    for row in rows {
        out.push_str(&row.csv_line());
        out.push_str(CRLF);
    }
    Ok(out)
}

/// The sweep result table; one row per result, in input order.
pub fn sweep_csv(results: &[ExperimentResult]) -> Result<String> {
    sweep_csv_from_rows(&rows_from(results)?)
}

/// Parses text produced by [`sweep_csv`]. Accepts LF or CRLF line endings.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == SWEEP_HEADER => {}
        Some((_, h)) => {
            return Err(Error::config(format!("sweep csv line 1: unexpected header '{h}'")))
        }
        None => return Err(Error::config("sweep csv is empty")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(Error::config(format!(
                "sweep csv line {lineno}: expected 13 fields, found {}",
                fields.len()
            )));
        }
        let kind = match fields[0] {
            "constant" => ScheduleKind::Constant,
            "dynamic" => ScheduleKind::Dynamic,
            other => {
                return Err(Error::config(format!(
                    "sweep csv line {lineno}: unknown schedule kind '{other}'"
                )))
            }
        };
        let f = |j: usize| -> Result<f64> {
            fields[j].parse().map_err(|_| {
                Error::config(format!(
                    "sweep csv line {lineno}: field '{}' is not a number",
                    fields[j]
                ))
            })
        };
        let u = |j: usize| -> Result<usize> {
            fields[j].parse().map_err(|_| {
                Error::config(format!(
                    "sweep csv line {lineno}: field '{}' is not a count",
                    fields[j]
                ))
            })
        };
        rows.push(SweepRow {
            kind,
            s_i: f(1)?,
            s_f: f(2)?,
            t0: u(3)?,
            tf: u(4)?,
            mae_pruned: f(5)?,
            size_pruned_gz: u(6)?,
            mae_sparse: f(7)?,
            size_sparse_gz: u(8)?,
            mae_quant: f(9)?,
            size_quant_gz: u(10)?,
            achieved_sparsity: f(11)?,
            baseline_mae: f(12)?,
        });
    }
    if rows.is_empty() {
        return Err(Error::config("sweep csv has a header but no rows"));
    }
    Ok(rows)
}

/// Best rows for one schedule kind: lowest pruned MAE and smallest sparse
/// gzip size.
#[derive(Debug, Clone)]
pub struct BestRows {
    pub kind: ScheduleKind,
    pub best_accuracy: SweepRow,
    pub best_size: SweepRow,
}

/// Selects the best-accuracy row (minimum mae_pruned, ties broken by smaller
/// size_sparse_gz, then input order) and the best-size row (minimum
/// size_sparse_gz, ties broken by smaller mae_pruned, then input order) for
/// every kind present, in kind order.
pub fn best_rows(rows: &[SweepRow]) -> Vec<BestRows> {
    let mut out = Vec::new();
    for kind in [ScheduleKind::Constant, ScheduleKind::Dynamic] {
        let of_kind: Vec<&SweepRow> = rows.iter().filter(|r| r.kind == kind).collect();
        if of_kind.is_empty() {
            continue;
        }
        let best_accuracy = of_kind
            .iter()
            .copied()
            .min_by(|a, b| {
                a.mae_pruned
                    .total_cmp(&b.mae_pruned)
                    .then(a.size_sparse_gz.cmp(&b.size_sparse_gz))
            })
            .unwrap()
            .clone();
        let best_size = of_kind
            .iter()
            .copied()
            .min_by(|a, b| {
                a.size_sparse_gz
                    .cmp(&b.size_sparse_gz)
                    .then(a.mae_pruned.total_cmp(&b.mae_pruned))
            })
            .unwrap()
            .clone();
        out.push(BestRows { kind, best_accuracy, best_size });
    }
    out
}

/// Markdown report: a table with the best-accuracy and best-size row per
/// schedule kind.
pub fn report_markdown(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::usage("no results to report"));
    }
    let mut md = String::new();
    md.push_str("# Pruning sweep report\n\n");
    let _ = writeln!(md, "{} runs.\n", rows.len());
    md.push_str(
        "| schedule | selection | s_i | s_f | t0 | tf | mae_pruned | size_pruned_gz | \
mae_sparse | size_sparse_gz | mae_quant | size_quant_gz | achieved_sparsity | baseline_mae |\n",
    );
    md.push_str(
        "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n",
    );
    let mut table_row = |label: &str, r: &SweepRow| {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            r.kind.name(),
            label,
            r.s_i,
            r.s_f,
            r.t0,
            r.tf,
            r.mae_pruned,
            r.size_pruned_gz,
            r.mae_sparse,
            r.size_sparse_gz,
            r.mae_quant,
            r.size_quant_gz,
            r.achieved_sparsity,
            r.baseline_mae,
        );
    };
    for best in best_rows(rows) {
        table_row("best accuracy", &best.best_accuracy);
        table_row("best size", &best.best_size);
    }
    md.push_str(
        "\nSelection: best accuracy minimizes mae_pruned (ties: smaller size_sparse_gz); \
best size minimizes size_sparse_gz (ties: smaller mae_pruned).\n",
    );
    Ok(md)
}

/// Dynamic rows are restricted to the smallest initial sparsity present so
/// every figure axis varies exactly one parameter; constant rows carry
/// s_i == s_f and pass through.
fn s_i_filter(rows: &[SweepRow]) -> Vec<&SweepRow> {
    let min_si = rows
        .iter()
        .filter(|r| r.kind == ScheduleKind::Dynamic)
        .map(|r| r.s_i)
        .min_by(f64::total_cmp);
    rows.iter()
        .filter(|r| r.kind != ScheduleKind::Dynamic || Some(r.s_i) == min_si)
        .collect()
}

/// Rows for the sparsity axis: every s_f per kind at the widest pruning
/// window present (smallest t0, largest tf).
fn sparsity_axis(rows: &[SweepRow]) -> Result<Vec<&SweepRow>> {
    let t0 = rows.iter().map(|r| r.t0).min().expect("nonempty");
    let tf = rows.iter().map(|r| r.tf).max().expect("nonempty");
    let picked: Vec<&SweepRow> = s_i_filter(rows)
        .into_iter()
        .filter(|r| r.t0 == t0 && r.tf == tf)
        .collect();
    if picked.is_empty() {
        return Err(Error::usage(format!(
            "sparsity axis has no rows at the anchor window t0={t0}, tf={tf}"
        )));
    }
    Ok(picked)
}

/// Gzip size of each artifact vs final sparsity, one row per s_f per kind.
pub fn fig_size_vs_sparsity(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::usage("no results to report"));
    }
    let picked = sparsity_axis(rows)?;
    let mut out = String::from("schedule_kind,s_f,size_pruned_gz,size_sparse_gz,size_quant_gz");
    out.push_str(CRLF);
    for r in picked {
        let _ = write!(
            out,
            "{},{},{},{},{}{CRLF}",
            r.kind.name(),
            r.s_f,
            r.size_pruned_gz,
            r.size_sparse_gz,
            r.size_quant_gz
        );
    }
    Ok(out)
}

/// Test MAE vs final sparsity, one row per s_f per kind.
pub fn fig_mae_vs_sparsity(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::usage("no results to report"));
    }
    let picked = sparsity_axis(rows)?;
    let mut out = String::from("schedule_kind,s_f,mae_pruned,mae_quant,baseline_mae");
    out.push_str(CRLF);
    for r in picked {
        let _ = write!(
            out,
            "{},{},{},{},{}{CRLF}",
            r.kind.name(),
            r.s_f,
            r.mae_pruned,
            r.mae_quant,
            r.baseline_mae
        );
    }
    Ok(out)
}

/// Test MAE and sparse size vs pruning start epoch, at the smallest final
/// sparsity and largest end epoch present.
pub fn fig_mae_vs_t0(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::usage("no results to report"));
    }
    let s_f = rows.iter().map(|r| r.s_f).min_by(f64::total_cmp).expect("nonempty");
    let tf = rows.iter().map(|r| r.tf).max().expect("nonempty");
    let picked: Vec<&SweepRow> = s_i_filter(rows)
        .into_iter()
        .filter(|r| r.s_f == s_f && r.tf == tf)
        .collect();
    if picked.is_empty() {
        return Err(Error::usage(format!(
            "start-epoch axis has no rows at the anchor s_f={s_f}, tf={tf}"
        )));
    }
    let mut out = String::from("schedule_kind,t0,mae_pruned,mae_quant,size_sparse_gz");
    out.push_str(CRLF);
    for r in picked {
        let _ = write!(
            out,
            "{},{},{},{},{}{CRLF}",
            r.kind.name(),
            r.t0,
            r.mae_pruned,
            r.mae_quant,
            r.size_sparse_gz
        );
    }
    Ok(out)
}

/// Test MAE and sparse size vs pruning end epoch, at the smallest final
/// sparsity and smallest start epoch present.
pub fn fig_mae_vs_tf(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::usage("no results to report"));
    }
    let s_f = rows.iter().map(|r| r.s_f).min_by(f64::total_cmp).expect("nonempty");
    let t0 = rows.iter().map(|r| r.t0).min().expect("nonempty");
    let picked: Vec<&SweepRow> = s_i_filter(rows)
        .into_iter()
        .filter(|r| r.s_f == s_f && r.t0 == t0)
        .collect();
    if picked.is_empty() {
        return Err(Error::usage(format!(
            "end-epoch axis has no rows at the anchor s_f={s_f}, t0={t0}"
        )));
    }
    let mut out = String::from("schedule_kind,tf,mae_pruned,mae_quant,size_sparse_gz");
    out.push_str(CRLF);
    for r in picked {
        let _ = write!(
            out,
            "{},{},{},{},{}{CRLF}",
            r.kind.name(),
            r.tf,
            r.mae_pruned,
            r.mae_quant,
            r.size_sparse_gz
        );
    }
    Ok(out)
}

/// Per-epoch validation MAE and achieved sparsity of every run, long format,
/// with the run's unpruned baseline curve alongside.
pub fn fig_validation(results: &[ExperimentResult]) -> Result<String> {
    if results.is_empty() {
        return Err(Error::usage("no results to report"));
    }
    let mut out =
        String::from("schedule_kind,s_i,s_f,t0,tf,epoch,val_mae,baseline_val_mae,sparsity");
    out.push_str(CRLF);
    for r in results {
        let row = SweepRow::from_result(r);
        for (e, ((v, b), s)) in r
            .val_curve
            .iter()
            .zip(&r.baseline_curve)
            .zip(&r.sparsity_curve)
            .enumerate()
        {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{}{CRLF}",
                row.kind.name(),
                row.s_i,
                row.s_f,
                row.t0,
                row.tf,
                e,
                v,
                b,
                s
            );
        }
    }
    Ok(out)
}

fn best_and_worst(results: &[ExperimentResult]) -> (&ExperimentResult, &ExperimentResult) {
    let best = results
        .iter()
        .min_by(|a, b| {
            a.pruned
                .test_mae
                .total_cmp(&b.pruned.test_mae)
                .then(a.sparse.gzip_size.cmp(&b.sparse.gzip_size))
        })
        .expect("nonempty");
    let worst = results
        .iter()
        .max_by(|a, b| {
            a.pruned
                .test_mae
                .total_cmp(&b.pruned.test_mae)
                .then(b.sparse.gzip_size.cmp(&a.sparse.gzip_size))
        })
        .expect("nonempty");
    (best, worst)
}

/// Prediction trace over the 20 fixed test samples: the true target, the
/// best run's baseline prediction, and the pruned predictions of the best
/// and worst runs by pruned MAE.
pub fn fig_trace(results: &[ExperimentResult]) -> Result<String> {
    if results.is_empty() {
        return Err(Error::usage("no results to report"));
    }
    let (best, worst) = best_and_worst(results);
    let mut out = String::from("true,baseline,best,worst");
    out.push_str(CRLF);
    for i in 0..best.trace.truth.len() {
        let _ = write!(
            out,
            "{},{},{},{}{CRLF}",
            best.trace.truth[i], best.trace.baseline[i], best.trace.pruned[i], worst.trace.pruned[i]
        );
    }
    Ok(out)
}

/// Per-variant predictions of the best run on the 20 fixed test samples;
/// the pruned and sparse columns are identical by construction.
pub fn fig_trace_variants(results: &[ExperimentResult]) -> Result<String> {
    if results.is_empty() {
        return Err(Error::usage("no results to report"));
    }
    let (best, _) = best_and_worst(results);
    let mut out = String::from("sample,true,pruned,sparse,quantized");
    out.push_str(CRLF);
    for i in 0..best.trace.truth.len() {
        let _ = write!(
            out,
            "{},{},{},{},{}{CRLF}",
            i, best.trace.truth[i], best.trace.pruned[i], best.trace.sparse[i], best.trace.quantized[i]
        );
    }
    Ok(out)
}
