//! Artifact writers. Every float in a CSV carries 17 significant digits.

use std::path::{Path, PathBuf};

use nsp_core::DecayFit;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// One judged (or informational, `pass = None`) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    /// Column of `norms.csv` the fit was taken from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub pass: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn check(name: impl Into<String>, value: f64, bound: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            column: None,
            fit: None,
            value: Some(value),
            bound: Some(bound),
            pass: Some(pass),
            note: None,
        }
    }

    pub fn fitted(name: impl Into<String>, column: &str, fit: DecayFit) -> Self {
        Self {
            name: name.into(),
            column: Some(column.to_string()),
            pass: fit.pass,
            value: Some(fit.exponent),
            bound: fit.target,
            fit: Some(fit),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_column(mut self, column: &str) -> Self {
        self.column = Some(column.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitsFile {
    pub experiment: String,
    pub all_pass: bool,
    pub verdicts: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

/// Columns of equal length under self-describing headers.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(first: &str, values: Vec<f64>) -> Self {
        Self {
            headers: vec![first.to_string()],
            columns: vec![values],
        }
    }

    pub fn push(&mut self, header: impl Into<String>, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns[0].len());
        self.headers.push(header.into());
        self.columns.push(values);
    }

    pub fn column(&self, header: &str) -> Option<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == header)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.headers)?;
    for i in 0..table.rows() {
        w.write_record(table.columns.iter().map(|c| format_f64(c[i])))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let mut r = csv::Reader::from_path(path)?;
    let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut columns = vec![Vec::new(); headers.len()];
    for rec in r.records() {
        let rec = rec?;
        for (c, field) in columns.iter_mut().zip(rec.iter()) {
            let v = field
                .parse::<f64>()
                .map_err(|e| CliError::config(&path.display().to_string(), format!("`{field}`: {e}")))?;
            c.push(v);
        }
    }
    Ok(Table { headers, columns })
}

fn file_stem(header: &str) -> String {
    header
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

/// One two-column file per series, abscissa first.
pub fn write_plotdata(dir: &Path, table: &Table) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Vec::new();
    for (h, col) in table.headers.iter().zip(&table.columns).skip(1) {
        let path = dir.join(format!("{}.csv", file_stem(h)));
        let mut t = Table::new(&table.headers[0], table.columns[0].clone());
        t.push(h.clone(), col.clone());
        write_csv(&path, &t)?;
        out.push(path);
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}
