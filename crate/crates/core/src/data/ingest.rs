use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use log::{info, warn};

use super::DataTable;
use crate::error::{Error, Result};

/// How raw label cells become class ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum LabelMapping {
    /// Cell parses as a number equal to 0 or 1.
    #[default]
    Numeric,
    /// Cell text (trimmed, case-insensitive) must appear in one of the lists.
    Text {
        normal: Vec<String>,
        attack: Vec<String>,
    },
}

impl LabelMapping {
    fn map(&self, raw: &str) -> Option<u8> {
        let raw = raw.trim();
        match self {
            LabelMapping::Numeric => match raw.parse::<f64>() {
                Ok(0.0) => Some(0),
                Ok(1.0) => Some(1),
                _ => None,
            },
            LabelMapping::Text { normal, attack } => {
                if normal.iter().any(|n| n.eq_ignore_ascii_case(raw)) {
                    Some(0)
                } else if attack.iter().any(|a| a.eq_ignore_ascii_case(raw)) {
                    Some(1)
                } else {
                    None
                }
            }
        }
    }
}

/// Ingestion schema for the telemetry CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub label_column: String,
    /// Columns dropped before type detection (timestamps, attack-type text).
    pub exclude: Vec<String>,
    /// Extra token treated like an empty cell.
    pub missing_sentinel: Option<String>,
    pub label_mapping: LabelMapping,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            label_column: "label".to_string(),
            exclude: Vec::new(),
            missing_sentinel: None,
            label_mapping: LabelMapping::Numeric,
        }
    }
}

impl IngestConfig {
    /// Reads the plain-text `key = value` ingestion file.
    ///
    /// Recognised keys: `label_column`, `exclude` (comma list),
    /// `missing_sentinel`, `label_normal` and `label_attack` (comma lists,
    /// switching to text label mapping). Unknown keys are ignored so the same
    /// file can carry run options.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_map(&parse_key_values(&text)))
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Self {
        let mut cfg = Self::default();
        if let Some(v) = map.get("label_column") {
            cfg.label_column = v.clone();
        }
        if let Some(v) = map.get("exclude") {
            cfg.exclude = split_list(v);
        }
        if let Some(v) = map.get("missing_sentinel") {
            cfg.missing_sentinel = Some(v.clone());
        }
        let normal = map.get("label_normal").map(|v| split_list(v));
        let attack = map.get("label_attack").map(|v| split_list(v));
        if normal.is_some() || attack.is_some() {
            cfg.label_mapping = LabelMapping::Text {
                normal: normal.unwrap_or_default(),
                attack: attack.unwrap_or_default(),
            };
        }
        cfg
    }

    fn is_missing(&self, cell: &str) -> bool {
        let cell = cell.trim();
        cell.is_empty() || self.missing_sentinel.as_deref() == Some(cell)
    }
}

/// Parses `key = value` lines. `#` starts a comment line; later keys win.
pub fn parse_key_values(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

fn split_list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Loads a headed, comma-delimited UTF-8 file into a [`DataTable`].
///
/// Columns with any non-numeric, non-missing cell are dropped (and logged);
/// empty cells and the sentinel token are recorded as missing.
pub fn load_csv(path: &Path, schema: &IngestConfig) -> Result<DataTable> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .delimiter(b',')
        .from_reader(BufReader::new(file));
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = headers
        .iter()
        .position(|h| *h == schema.label_column)
        .ok_or_else(|| Error::MissingLabelColumn(schema.label_column.clone()))?;

    let mut candidates: Vec<usize> = (0..headers.len())
        .filter(|&j| j != label_idx && !schema.exclude.contains(&headers[j]))
        .collect();
    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    let mut labels = Vec::new();
    let mut numeric = vec![true; headers.len()];

    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let raw_label = record.get(label_idx).unwrap_or("");
        let label = schema
            .label_mapping
            .map(raw_label)
            .ok_or_else(|| Error::InvalidLabel {
                row,
                value: raw_label.to_string(),
            })?;
        labels.push(label);
        let mut parsed = Vec::with_capacity(candidates.len());
        for &j in &candidates {
            let cell = record.get(j).unwrap_or("");
            if schema.is_missing(cell) {
                parsed.push(None);
                continue;
            }
            match cell.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => parsed.push(Some(v)),
                Ok(_) => parsed.push(None),
                Err(_) => {
                    numeric[j] = false;
                    parsed.push(None);
                }
            }
        }
        cells.push(parsed);
    }

    let keep: Vec<usize> = (0..candidates.len())
        .filter(|&c| numeric[candidates[c]])
        .collect();
    let dropped: Vec<&str> = candidates
        .iter()
        .filter(|&&j| !numeric[j])
        .map(|&j| headers[j].as_str())
        .collect();
    if !dropped.is_empty() {
        warn!("dropping non-numeric columns: {}", dropped.join(", "));
    }
    if keep.is_empty() {
        return Err(Error::NoUsableColumns);
    }

    let n_rows = labels.len();
    let mut features = Vec::with_capacity(n_rows * keep.len());
    let mut mask = Vec::with_capacity(n_rows * keep.len());
    for row in &cells {
        for &c in &keep {
            match row[c] {
                Some(v) => {
                    features.push(v);
                    mask.push(false);
                }
                None => {
                    features.push(f64::NAN);
                    mask.push(true);
                }
            }
        }
    }
    candidates = keep.iter().map(|&c| candidates[c]).collect();
    let names = candidates.iter().map(|&j| headers[j].clone()).collect();
    info!(
        "loaded {} rows x {} numeric columns from {}",
        n_rows,
        candidates.len(),
        path.display()
    );
    DataTable::with_mask(features, labels, names, mask)
}
