//! Two-column CSV inputs with a header row.
//!
//! * `true_label,predicted_label`: one classified item per row.
//! * `true_label,score`: higher scores predict class 0.
//! * `fpr,tpr`: ROC curve vertices.

use std::path::Path;

use utility_eval::roc::{curve_from_scores, RocCurve, RocPoint};
use utility_eval::ConfusionMatrix;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum InputData {
    Labels { truth: Vec<u8>, predicted: Vec<u8> },
    Scores { truth: Vec<u8>, scores: Vec<f64> },
    Curve(Vec<RocPoint>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Labels,
    Scores,
    Curve,
}

fn layout(path: &Path, header: &csv::StringRecord) -> CliResult<Layout> {
    let cols: Vec<String> = header
        .iter()
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();
    if cols.len() != 2 {
        return Err(CliError::Input(format!(
            "{}:1: expected a two-column header, found {} columns",
            path.display(),
            cols.len()
        )));
    }
    match (cols[0].as_str(), cols[1].as_str()) {
        ("fpr", "tpr") | ("f", "t") => Ok(Layout::Curve),
        (_, c) if c.contains("score") => Ok(Layout::Scores),
        (_, c) if c.contains("pred") => Ok(Layout::Labels),
        _ => Err(CliError::Input(format!(
            "{}:1: unrecognised header `{}`; expected true_label,predicted_label or \
             true_label,score or fpr,tpr",
            path.display(),
            cols.join(",")
        ))),
    }
}

fn label(path: &Path, line: u64, column: &str, field: &str) -> CliResult<u8> {
    match field.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(CliError::Input(format!(
            "{}:{line}: {column} must be 0 or 1, got `{other}`",
            path.display()
        ))),
    }
}

fn real(path: &Path, line: u64, column: &str, field: &str) -> CliResult<f64> {
    match field.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Input(format!(
            "{}:{line}: {column} must be a finite number, got `{}`",
            path.display(),
            field.trim()
        ))),
    }
}

pub fn read_input(path: &Path) -> CliResult<InputData> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let header = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .clone();
    let layout = layout(path, &header)?;

    let mut first = Vec::new();
    let mut second = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(CliError::Input(format!(
                "{}:{line}: expected 2 fields, found {}",
                path.display(),
                record.len()
            )));
        }
        match layout {
            Layout::Labels => {
                first.push(label(path, line, "true_label", &record[0])? as f64);
                second.push(label(path, line, "predicted_label", &record[1])? as f64);
            }
            Layout::Scores => {
                first.push(label(path, line, "true_label", &record[0])? as f64);
                second.push(real(path, line, "score", &record[1])?);
            }
            Layout::Curve => {
                first.push(real(path, line, "fpr", &record[0])?);
                second.push(real(path, line, "tpr", &record[1])?);
            }
        }
    }
    if first.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    let labels = |v: Vec<f64>| v.into_iter().map(|x| x as u8).collect();
    Ok(match layout {
        Layout::Labels => InputData::Labels {
            truth: labels(first),
            predicted: labels(second),
        },
        Layout::Scores => InputData::Scores {
            truth: labels(first),
            scores: second,
        },
        Layout::Curve => InputData::Curve(
            first
                .into_iter()
                .zip(second)
                .map(|(f, t)| RocPoint::new(f, t))
                .collect(),
        ),
    })
}

/// Confusion matrix of a predicted-label file, normalized, with the item
/// count retained.
pub fn read_confusion(path: &Path) -> CliResult<ConfusionMatrix> {
    match read_input(path)? {
        InputData::Labels { truth, predicted } => {
            let mut counts = [[0u64; 2]; 2];
            for (t, p) in truth.iter().zip(&predicted) {
                counts[*p as usize][*t as usize] += 1;
            }
            ConfusionMatrix::from_counts(counts).map_err(CliError::input)
        }
        _ => Err(CliError::Input(format!(
            "{}: expected a true_label,predicted_label file",
            path.display()
        ))),
    }
}

/// An ROC curve from a score file or a vertex file, and the class-0
/// proportion when the data reveal it.
pub fn read_curve(path: &Path) -> CliResult<(RocCurve, Option<f64>)> {
    let wrap = |e: utility_eval::Error| CliError::Input(format!("{}: {e}", path.display()));
    match read_input(path)? {
        InputData::Scores { truth, scores } => {
            let b = truth.iter().filter(|&&t| t == 0).count() as f64 / truth.len() as f64;
            Ok((curve_from_scores(&truth, &scores).map_err(wrap)?, Some(b)))
        }
        InputData::Curve(points) => Ok((RocCurve::new(points).map_err(wrap)?, None)),
        InputData::Labels { .. } => Err(CliError::Input(format!(
            "{}: ROC analysis needs scores (true_label,score) or vertices (fpr,tpr)",
            path.display()
        ))),
    }
}
