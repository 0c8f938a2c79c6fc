//! Canonical JSON reports and CSV tables.
//!
//! JSON output has sorted keys, two-space indentation, shortest round-trip
//! float formatting and a trailing newline, so equal reports are
//! byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{LrcpError, Result};
use crate::lrcp::CompressionResult;
use crate::matrix::Subspace;

fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let sorted: BTreeMap<String, Value> =
                map.into_iter().map(|(k, v)| (k, sort_keys(v))).collect();
            Value::Object(sorted.into_iter().collect::<Map<_, _>>())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

pub fn to_canonical_json<T: Serialize + ?Sized>(report: &T) -> Result<String> {
    let value =
        serde_json::to_value(report).map_err(|e| LrcpError::Serialization(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&sort_keys(value))
        .map_err(|e| LrcpError::Serialization(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn write_report<T: Serialize + ?Sized>(report: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = to_canonical_json(report)?;
    fs::write(path, text).map_err(|e| LrcpError::io(path, e))
}

pub fn read_report<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| LrcpError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| LrcpError::Serialization(e.to_string()))
}

/// Writes one CSV row per item, with a header taken from the field names.
pub fn write_csv<T: Serialize>(rows: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| LrcpError::io(path, e))
}

fn csv_error(path: &Path, err: csv::Error) -> LrcpError {
    if err.is_io_error() {
        match err.into_kind() {
            csv::ErrorKind::Io(e) => LrcpError::io(path, e),
            other => LrcpError::Serialization(format!("{other:?}")),
        }
    } else {
        LrcpError::Serialization(err.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSummary {
    pub rank: usize,
    pub ambient_dim: usize,
    pub explained: Vec<f64>,
    pub centered: bool,
}

impl From<&Subspace> for SubspaceSummary {
    fn from(s: &Subspace) -> Self {
        Self {
            rank: s.rank(),
            ambient_dim: s.ambient_dim(),
            explained: s.explained().to_vec(),
            centered: s.center().is_some(),
        }
    }
}

/// Serializable view of a [`CompressionResult`] without the feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub n_tokens: usize,
    pub dim: usize,
    pub budget: usize,
    pub retained_indices: Vec<usize>,
    pub scores: Vec<f64>,
    pub surrogate_loss: f64,
    /// Discarded index -> retained index.
    pub assignments: BTreeMap<usize, usize>,
    pub subspace: SubspaceSummary,
}

impl From<&CompressionResult> for CompressionReport {
    fn from(r: &CompressionResult) -> Self {
        Self {
            n_tokens: r.scores.len(),
            dim: r.output.dim(),
            budget: r.retained_indices.len(),
            retained_indices: r.retained_indices.clone(),
            scores: r.scores.clone(),
            surrogate_loss: r.surrogate_loss,
            assignments: r.assignments.clone(),
            subspace: SubspaceSummary::from(&r.subspace),
        }
    }
}

/// Per-token row of the retained-token table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRow {
    pub index: usize,
    pub score: f64,
    pub retained: bool,
    /// Retained token a discarded token merges into; empty when retained.
    pub assigned_to: Option<usize>,
}

pub fn token_rows(result: &CompressionResult) -> Vec<TokenRow> {
    let mut retained = vec![false; result.scores.len()];
    for &i in &result.retained_indices {
        retained[i] = true;
    }
    result
        .scores
        .iter()
        .enumerate()
        .map(|(index, &score)| TokenRow {
            index,
            score,
            retained: retained[index],
            assigned_to: result.assignments.get(&index).copied(),
        })
        .collect()
}
