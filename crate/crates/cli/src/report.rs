use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use utility_eval::ConfusionMatrix;

use crate::error::{CliError, CliResult};

/// Bumped whenever a JSON field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub fn to_json<T: Serialize>(command: &str, body: &T) -> String {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        body,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_owned(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_owned(),
        source,
    })
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 fields")
}

/// Left-aligned first column, right-aligned others.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let n = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (k, cell) in r.iter().enumerate().take(n) {
            width[k] = width[k].max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::new();
        for (k, c) in cells.iter().enumerate() {
            if k == 0 {
                s.push_str(&format!("{c:<w$}", w = width[k]));
            } else {
                s.push_str(&format!("  {c:>w$}", w = width[k]));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

/// Normalized entries to 6 decimals, rows predicted class, columns true class.
pub fn matrix_text(c: &ConfusionMatrix) -> String {
    let e = c.entries();
    format!(
        "             true 0    true 1\npredicted 0  {:.6}  {:.6}\npredicted 1  {:.6}  {:.6}\n",
        e[0][0], e[0][1], e[1][0], e[1][1]
    )
}

pub fn rounded_matrix(c: &ConfusionMatrix) -> [[String; 2]; 2] {
    c.entries().map(|row| row.map(|v| format!("{v:.6}")))
}

pub fn optional(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.digits$}"))
}
