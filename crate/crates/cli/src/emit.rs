//! CSV and JSON writers. Every number goes through `fmt_g` in CSV and the
//! shortest round-trip form in JSON, so identical inputs give identical bytes.

use std::io::Write;
use std::path::Path;

use iontrap_core::report::fmt_g;
use iontrap_core::ComplexMatrix;
use serde_json::{json, Map, Value};

use crate::config::Format;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_g(*x),
            Cell::Text(s) => csv_quote(s),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Result of one scenario, ready for either format.
#[derive(Clone, Debug)]
pub struct Output {
    pub scenario: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Gate matrix with its basis labels; JSON writes it as `matrix`.
    pub matrix: Option<(Vec<String>, ComplexMatrix)>,
    /// Extra JSON-only fields, e.g. phase summaries or a species record.
    pub extra: Map<String, Value>,
}

impl Output {
    pub fn table(scenario: &str, columns: &[&str], rows: Vec<Vec<Cell>>) -> Self {
        Output {
            scenario: scenario.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows,
            matrix: None,
            extra: Map::new(),
        }
    }

    /// Gate output: CSV lists `row,col,re,im`; JSON carries the nested
    /// `[re, im]` matrix and the basis as its columns.
    pub fn gate(scenario: &str, basis: &[&str], m: &ComplexMatrix) -> Self {
        let mut rows = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                rows.push(vec![
                    Cell::from(basis[i]),
                    Cell::from(basis[j]),
                    Cell::Num(m[(i, j)].re),
                    Cell::Num(m[(i, j)].im),
                ]);
            }
        }
        Output {
            scenario: scenario.to_string(),
            columns: ["row", "col", "re", "im"].map(String::from).to_vec(),
            rows,
            matrix: Some((basis.iter().map(|s| s.to_string()).collect(), m.clone())),
            extra: Map::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: Value) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.iter().map(|c| csv_quote(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
        doc.insert("scenario".into(), json!(self.scenario));
        match &self.matrix {
            Some((basis, m)) => {
                doc.insert("columns".into(), json!(basis));
                doc.insert("basis".into(), json!(basis));
                let rows: Vec<Vec<[f64; 2]>> = (0..m.rows())
                    .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect();
                doc.insert("matrix".into(), json!(rows));
            }
            None => {
                doc.insert("columns".into(), json!(self.columns));
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                    .collect();
                doc.insert("rows".into(), Value::Array(rows));
            }
        }
        for (k, v) in &self.extra {
            doc.insert(k.clone(), v.clone());
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("plain data serializes");
        text.push('\n');
        text
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Writes `contents` to a temporary file beside `path`, then renames it
/// into place so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
