use std::io::Write;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::{invalid, CliError};

/// Rows of a curve; the first column is the ordering key.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// What a subcommand produces before serialization.
pub struct Report {
    pub result: Value,
    pub table: Option<Table>,
    pub seeds: Vec<u64>,
    /// Format used when neither `--format` nor `--out` decides.
    pub default_format: Format,
}

impl Report {
    pub fn single(result: impl Serialize) -> Result<Self, CliError> {
        Ok(Report {
            result: to_value(result)?,
            table: None,
            seeds: vec![],
            default_format: Format::Json,
        })
    }

    pub fn curve(result: impl Serialize, table: Table) -> Result<Self, CliError> {
        Ok(Report {
            result: to_value(result)?,
            table: Some(table),
            seeds: vec![],
            default_format: Format::Csv,
        })
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

pub fn to_value(v: impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Numerical(format!("cannot serialize result: {e}")))
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub started_unix_seconds: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    pub version: String,
    pub seeds: Vec<u64>,
    pub threads: usize,
    /// Parsed contents of model files, keyed by flag.
    pub inputs: Map<String, Value>,
    pub timing: Timing,
}

pub struct Clock {
    started: SystemTime,
    instant: Instant,
}

impl Clock {
    pub fn start() -> Self {
        Clock {
            started: SystemTime::now(),
            instant: Instant::now(),
        }
    }

    pub fn timing(&self) -> Timing {
        Timing {
            started_unix_seconds: self
                .started
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
            elapsed_seconds: self.instant.elapsed().as_secs_f64(),
        }
    }
}

/// Where and how to write.
pub struct Destination {
    pub path: Option<String>,
    pub format: Option<Format>,
}

impl Destination {
    pub fn new(out: Option<&str>, format: Option<Format>) -> Self {
        match out {
            Some("json") => Destination {
                path: None,
                format: format.or(Some(Format::Json)),
            },
            Some("csv") => Destination {
                path: None,
                format: format.or(Some(Format::Csv)),
            },
            Some("-") => Destination { path: None, format },
            Some(p) => {
                let by_ext = if p.ends_with(".csv") {
                    Some(Format::Csv)
                } else if p.ends_with(".json") {
                    Some(Format::Json)
                } else {
                    None
                };
                Destination {
                    path: Some(p.to_string()),
                    format: format.or(by_ext),
                }
            }
            None => Destination { path: None, format },
        }
    }
}

pub fn render(report: &Report, manifest: &RunManifest, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "manifest": manifest, "result": report.result });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| invalid(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let table = match &report.table {
                Some(t) => t.clone(),
                None => flatten(&report.result),
            };
            let mut out = Vec::new();
            let m = serde_json::to_string(manifest).map_err(|e| invalid(e.to_string()))?;
            writeln!(out, "# manifest: {m}").expect("write to memory");
            let mut w = csv::Writer::from_writer(out);
            let io = |e: csv::Error| invalid(format!("csv: {e}"));
            w.write_record(&table.columns).map_err(io)?;
            for row in &table.rows {
                w.write_record(row.iter().map(cell)).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| invalid(format!("csv: {e}")))?;
            Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One-row table of a single result.
fn flatten(result: &Value) -> Table {
    match result {
        Value::Object(map) => Table {
            columns: map.keys().cloned().collect(),
            rows: vec![map.values().cloned().collect()],
        },
        other => Table {
            columns: vec!["value".into()],
            rows: vec![vec![other.clone()]],
        },
    }
}

pub fn emit(text: &str, dest: &Destination) -> Result<(), CliError> {
    match &dest.path {
        Some(p) => std::fs::write(p, text).map_err(|e| invalid(format!("cannot write {p}: {e}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| invalid(format!("cannot write output: {e}")))
        }
    }
}
