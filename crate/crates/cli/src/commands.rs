use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bogp_core::bayesopt::spaces::write_trace_csv;
use bogp_core::data::{
    apply_preprocessor, fit_preprocessor, load_csv, pca_project, stratified_split, synthesize,
    write_pca_csv,
};
use bogp_core::eval::report::{
    merge_reports, read_report_csv, rows_from_reports, write_report_csv, ReportRow,
};
use bogp_core::eval::{
    baseline_specs, compare_models, tune, EvalReport, NamedModel, TableRow, TuneOutcome,
    TuneTarget,
};
use bogp_core::DataTable;
use log::{error, info};

use crate::config::{DataSource, RunConfig};
use crate::{CmdResult, Failure, OutputLock};

pub const PCA_FILE: &str = "pca.csv";
pub const BASELINE_FILE: &str = "baseline_report.csv";
pub const TRACE_ENSEMBLE_FILE: &str = "trace_ensemble.csv";
pub const TRACE_DT_FILE: &str = "trace_dt.csv";
pub const OPTIMIZED_FILE: &str = "optimized_report.csv";
pub const FINAL_CSV: &str = "final_report.csv";
pub const FINAL_MD: &str = "final_report.md";
pub const FINAL_JSON: &str = "final_report.json";

/// Writes through a sibling temp file and renames, so a failed command never
/// leaves a truncated artifact behind.
fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> bogp_core::Result<()>,
) -> CmdResult {
    let tmp = path.with_extension("tmp");
    let io_err = |e: std::io::Error| Failure::internal(format!("writing {}: {e}", path.display()));
    let file = File::create(&tmp).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    let written = body(&mut w).map_err(Failure::from).and_then(|()| w.flush().map_err(io_err));
    drop(w);
    if let Err(e) = written {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, path).map_err(io_err)
}

pub fn load_table(cfg: &RunConfig) -> CmdResult<DataTable> {
    let table = match cfg.require_source()? {
        DataSource::File(path) => load_csv(path, &cfg.ingest)?,
        DataSource::Synthetic(s) => synthesize(s)?,
    };
    let [normal, attack] = table.class_counts();
    info!(
        "loaded {} rows x {} features ({normal} normal, {attack} attack)",
        table.n_rows(),
        table.n_cols()
    );
    Ok(table)
}

fn holdout(cfg: &RunConfig, table: &DataTable) -> CmdResult<(DataTable, DataTable)> {
    Ok(stratified_split(table, cfg.test_fraction, cfg.seed)?)
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

/// Two-component projection of the scaled table.
pub fn cmd_pca(cfg: &RunConfig, msg: &mut dyn Write) -> CmdResult {
    let table = load_table(cfg)?;
    let _lock = OutputLock::acquire(&cfg.out)?;
    let scaled = apply_preprocessor(&fit_preprocessor(&table)?, &table)?;
    let result = pca_project(&scaled, 2)?;
    write_atomic(&out_path(cfg, PCA_FILE), |w| write_pca_csv(&result, w))?;
    let ratio = &result.explained_variance_ratio;
    let _ = writeln!(
        msg,
        "pca: {} rows; explained variance pc1 {:.4}, pc2 {:.4} (total {:.4})",
        table.n_rows(),
        ratio[0],
        ratio[1],
        ratio[0] + ratio[1]
    );
    Ok(())
}

/// Fits each spec separately so one failing model does not sink the rest.
fn evaluate_each(
    specs: &[NamedModel],
    train: &DataTable,
    test: &DataTable,
) -> CmdResult<Vec<EvalReport>> {
    let mut reports = Vec::new();
    for spec in specs {
        match compare_models(train, test, std::slice::from_ref(spec)) {
            Ok(mut r) => reports.append(&mut r),
            Err(e) => error!("{}: training failed: {e}", spec.name),
        }
    }
    if reports.is_empty() {
        return Err(Failure::internal("every model failed to train"));
    }
    Ok(reports)
}

fn print_rows(msg: &mut dyn Write, rows: &[ReportRow]) {
    for r in rows {
        let _ = writeln!(
            msg,
            "  {:<32} acc {:>5.1}  prec {:>5.1}  rec {:>5.1}  f {:.3}",
            r.algorithm, r.accuracy, r.precision, r.recall, r.fscore
        );
    }
}

pub fn cmd_baseline(cfg: &RunConfig, msg: &mut dyn Write) -> CmdResult {
    let table = load_table(cfg)?;
    let _lock = OutputLock::acquire(&cfg.out)?;
    let (train, test) = holdout(cfg, &table)?;
    let reports = evaluate_each(&baseline_specs(cfg.seed), &train, &test)?;
    let rows = rows_from_reports(&reports);
    write_atomic(&out_path(cfg, BASELINE_FILE), |w| write_report_csv(&rows, w))?;
    let _ = writeln!(msg, "baseline: {} train / {} test rows", train.n_rows(), test.n_rows());
    print_rows(msg, &rows);
    Ok(())
}

fn summarize(msg: &mut dyn Write, label: &str, outcome: &TuneOutcome) {
    let trace = &outcome.trace;
    let failures = trace.trials.iter().filter(|t| t.failure.is_some()).count();
    let _ = writeln!(
        msg,
        "{label}: best cv error {:.6} at iteration {} of {}{}",
        trace.best().unwrap_or(f64::NAN),
        trace.iterations_to_best().unwrap_or(0),
        trace.len(),
        if failures > 0 { format!(" ({failures} failed evaluations)") } else { String::new() }
    );
    let _ = writeln!(msg, "  best configuration: {:?}", outcome.best_config);
}

pub fn cmd_optimize(cfg: &RunConfig, msg: &mut dyn Write) -> CmdResult {
    let table = load_table(cfg)?;
    let _lock = OutputLock::acquire(&cfg.out)?;
    let (train, test) = holdout(cfg, &table)?;
    let settings = cfg.tune_settings();

    let mut specs = Vec::new();
    if cfg.tune_tree {
        let outcome = tune(&TuneTarget::Tree(cfg.tree_bounds.clone()), &train, &settings)?;
        write_atomic(&out_path(cfg, TRACE_DT_FILE), |w| {
            write_trace_csv(&outcome.trace, &outcome.space, w, cfg.timing)
        })?;
        summarize(msg, "optimized tree", &outcome);
        specs.push(NamedModel::new(TableRow::OptimizedDt, outcome.best_config));
    }
    let outcome = tune(&TuneTarget::Ensemble(cfg.ensemble_bounds.clone()), &train, &settings)?;
    write_atomic(&out_path(cfg, TRACE_ENSEMBLE_FILE), |w| {
        write_trace_csv(&outcome.trace, &outcome.space, w, cfg.timing)
    })?;
    summarize(msg, "optimized ensemble", &outcome);
    specs.push(NamedModel::new(TableRow::OptimizedEnsemble, outcome.best_config));

    let reports = evaluate_each(&specs, &train, &test)?;
    let rows = rows_from_reports(&reports);
    write_atomic(&out_path(cfg, OPTIMIZED_FILE), |w| write_report_csv(&rows, w))?;
    print_rows(msg, &rows);
    Ok(())
}

fn read_part(cfg: &RunConfig, name: &str, produced_by: &str) -> CmdResult<Vec<ReportRow>> {
    let path = out_path(cfg, name);
    let file = File::open(&path).map_err(|_| {
        Failure::missing(format!(
            "missing {} (run `bogp {produced_by}` first)",
            path.display()
        ))
    })?;
    Ok(read_report_csv(file)?)
}

/// Merges the baseline and optimized rows into the six-row table.
pub fn cmd_report(cfg: &RunConfig, msg: &mut dyn Write) -> CmdResult {
    let _lock = OutputLock::acquire(&cfg.out)?;
    let baseline = read_part(cfg, BASELINE_FILE, "baseline")?;
    let optimized = read_part(cfg, OPTIMIZED_FILE, "optimize")?;
    let table = merge_reports(&[baseline, optimized]).map_err(|e| Failure::missing(e.to_string()))?;
    write_atomic(&out_path(cfg, FINAL_CSV), |w| write_report_csv(&table.rows, w))?;
    write_atomic(&out_path(cfg, FINAL_MD), |w| {
        w.write_all(table.to_markdown().as_bytes())
            .map_err(|source| bogp_core::Error::Io { path: FINAL_MD.into(), source })
    })?;
    write_atomic(&out_path(cfg, FINAL_JSON), |w| {
        serde_json::to_writer_pretty(&mut *w, &table)?;
        w.write_all(b"\n")
            .map_err(|source| bogp_core::Error::Io { path: FINAL_JSON.into(), source })
    })?;
    let _ = write!(msg, "{}", table.to_markdown());
    Ok(())
}
