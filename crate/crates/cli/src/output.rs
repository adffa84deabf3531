//! Table writers: CSV with an exact header contract, or JSON with the same
//! columns. Every file starts with the config hash and tool version so runs
//! are traceable; floats carry 17 significant digits and round-trip exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::OutputFormat;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One table cell; integers and floats format differently.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::Value::from(*v),
            // keep the exact 17-digit text form so the two formats agree
            Cell::Float(v) => serde_json::Value::String(format_float(*v)),
            Cell::Text(s) => serde_json::Value::String(s.clone()),
        }
    }
}

/// Scientific notation with 17 significant digits; round-trip exact for f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    pub name: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: Vec<String>) -> Self {
        Self {
            name,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Write under `dir` as `<name>.csv` or `<name>.json`; returns the path.
    pub fn write(
        &self,
        dir: &Path,
        format: OutputFormat,
        config_sha256: &str,
    ) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let meta = format!("config_sha256={config_sha256} tool_version={TOOL_VERSION}");
        match format {
            OutputFormat::Csv => {
                let path = dir.join(format!("{}.csv", self.name));
                let mut text = String::new();
                writeln!(text, "# {meta}").unwrap();
                writeln!(text, "{}", self.columns.join(",")).unwrap();
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(text, "{}", line.join(",")).unwrap();
                }
                std::fs::write(&path, text)?;
                Ok(path)
            }
            OutputFormat::Json => {
                let path = dir.join(format!("{}.json", self.name));
                let doc = serde_json::json!({
                    "meta": {
                        "config_sha256": config_sha256,
                        "tool_version": TOOL_VERSION,
                    },
                    "columns": self.columns,
                    "rows": self.rows.iter()
                        .map(|r| r.iter().map(Cell::json).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                });
                let mut text = serde_json::to_string_pretty(&doc).expect("static document");
                text.push('\n');
                std::fs::write(&path, text)?;
                Ok(path)
            }
        }
    }
}
