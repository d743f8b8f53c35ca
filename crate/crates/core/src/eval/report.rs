//! Table-style report files: `algorithm,accuracy,precision,recall,fscore`
//! with percentages to one decimal and the F-score to three.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::compare::TableRow;
use super::metrics::EvalReport;
use crate::error::{Error, Result};

pub const REPORT_HEADER: [&str; 5] = ["algorithm", "accuracy", "precision", "recall", "fscore"];

/// One formatted table row. Percent columns are already rounded to one
/// decimal, `fscore` to three.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

impl From<&EvalReport> for ReportRow {
    fn from(r: &EvalReport) -> Self {
        Self {
            algorithm: r.model_name.clone(),
            accuracy: round_to(100.0 * r.accuracy, 1),
            precision: round_to(100.0 * r.precision, 1),
            recall: round_to(100.0 * r.recall, 1),
            fscore: round_to(r.f_score, 3),
        }
    }
}

impl ReportRow {
    fn fields(&self) -> [String; 5] {
        [
            self.algorithm.clone(),
            format!("{:.1}", self.accuracy),
            format!("{:.1}", self.precision),
            format!("{:.1}", self.recall),
            format!("{:.3}", self.fscore),
        ]
    }

    fn column(&self, c: usize) -> f64 {
        match c {
            0 => self.accuracy,
            1 => self.precision,
            2 => self.recall,
            _ => self.fscore,
        }
    }
}

pub fn rows_from_reports(reports: &[EvalReport]) -> Vec<ReportRow> {
    reports.iter().map(ReportRow::from).collect()
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_report_csv<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != REPORT_HEADER {
        return Err(Error::InvalidParameter(format!(
            "unexpected report header `{}`",
            header.join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn write_report_json<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, rows)?;
    Ok(())
}

/// The merged six-row table with per-column winners.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalTable {
    pub rows: Vec<ReportRow>,
    /// For each of accuracy, precision, recall, fscore: indices of the rows
    /// holding the column maximum.
    pub best: [Vec<usize>; 4],
}

/// Merges report rows into table order. Every table row must be present
/// exactly once.
pub fn merge_reports(parts: &[Vec<ReportRow>]) -> Result<FinalTable> {
    let mut slots: Vec<Option<ReportRow>> = vec![None; TableRow::ALL.len()];
    for row in parts.iter().flatten() {
        let at = TableRow::from_name(&row.algorithm)? as usize;
        if slots[at].replace(row.clone()).is_some() {
            return Err(Error::InvalidParameter(format!(
                "duplicate report row `{}`",
                row.algorithm
            )));
        }
    }
    let missing: Vec<&str> = TableRow::ALL
        .iter()
        .zip(&slots)
        .filter(|(_, s)| s.is_none())
        .map(|(r, _)| r.name())
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "missing report rows: {}",
            missing.join(", ")
        )));
    }
    let rows: Vec<ReportRow> = slots.into_iter().flatten().collect();
    let best = std::array::from_fn(|c| {
        let max = rows.iter().map(|r| r.column(c)).fold(f64::NEG_INFINITY, f64::max);
        (0..rows.len()).filter(|&i| rows[i].column(c) == max).collect()
    });
    Ok(FinalTable { rows, best })
}

impl FinalTable {
    pub fn is_best(&self, row: usize, column: usize) -> bool {
        self.best[column].contains(&row)
    }

    /// Markdown rendering with column winners in bold.
    pub fn to_markdown(&self) -> String {
        let mut s = String::from(
            "| Algorithm | Accuracy (%) | Precision (%) | Recall (%) | F-score |\n|---|---|---|---|---|\n",
        );
        for (i, row) in self.rows.iter().enumerate() {
            let f = row.fields();
            s.push_str(&format!("| {} ", f[0]));
            for c in 0..4 {
                if self.is_best(i, c) {
                    s.push_str(&format!("| **{}** ", f[c + 1]));
                } else {
                    s.push_str(&format!("| {} ", f[c + 1]));
                }
            }
            s.push_str("|\n");
        }
        s
    }
}
