//! Tabular and JSON artifacts with a metadata header.
//!
//! CSV numbers use `{:.16e}` (17 significant digits, round-trip safe) and
//! the header is a block of `# key: value` comment lines. JSON-lines files
//! start with a `{"meta": ...}` record followed by one object per row.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub case: String,
    /// `temperature` (K) or `transformed` for problems given directly.
    pub field_variable: &'static str,
}

impl Meta {
    pub fn new(config_sha256: &str, case: &str, physical: bool) -> Self {
        Meta {
            tool: "stefan",
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: config_sha256.to_string(),
            case: case.to_string(),
            field_variable: if physical { "temperature" } else { "transformed" },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, meta: &Meta, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                let meta = serde_json::to_value(meta).expect("meta serializes");
                for (k, v) in meta.as_object().expect("meta is an object") {
                    let v = v.as_str().map_or_else(|| v.to_string(), str::to_string);
                    let _ = writeln!(out, "# {k}: {v}");
                }
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            Format::Jsonl => {
                let head = serde_json::json!({ "meta": meta });
                out.push_str(&head.to_string());
                out.push('\n');
                for row in &self.rows {
                    let mut obj = Map::new();
                    for (c, v) in self.columns.iter().zip(row) {
                        obj.insert(c.to_string(), v.json());
                    }
                    out.push_str(&Value::Object(obj).to_string());
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Writes `<dir>/<stem>.csv` or `<dir>/<stem>.jsonl`.
    pub fn write(&self, dir: &Path, stem: &str, meta: &Meta, format: Format) -> Result<PathBuf> {
        let ext = match format {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        };
        let path = dir.join(format!("{stem}.{ext}"));
        write_file(&path, &self.render(meta, format))?;
        Ok(path)
    }
}

/// Pretty JSON document with the metadata under `meta`.
pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, body: &T) -> Result<()> {
    let mut doc = serde_json::to_value(body).map_err(|e| CliError::Config(e.to_string()))?;
    if let Value::Object(map) = &mut doc {
        let mut with_meta = Map::new();
        with_meta.insert("meta".into(), serde_json::to_value(meta).expect("meta serializes"));
        with_meta.append(map);
        doc = Value::Object(with_meta);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("json value serializes");
    text.push('\n');
    write_file(path, &text)
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}
