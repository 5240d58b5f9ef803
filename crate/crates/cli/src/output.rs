use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Result of one subcommand: a table, summary fields, and whether every
/// check it ran passed.
#[derive(Debug, Default)]
pub struct Artifact {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Map<String, Value>,
    /// Printed as-is when no format is requested.
    pub plain: Option<String>,
    /// JSON puts the single row's fields at top level instead of `rows`.
    pub flatten: bool,
    /// Used when `--format` is absent and there is no plain form.
    pub default_format: Format,
    pub verified: bool,
}

impl Artifact {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            verified: true,
            ..Self::default()
        }
    }

    pub fn row(&mut self, cells: Vec<Value>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn check(&mut self, ok: bool) {
        self.verified &= ok;
    }

    pub fn render(&self, format: Option<Format>, command: &str, seed: u64) -> String {
        match (format, &self.plain) {
            (None, Some(text)) => format!("{text}\n"),
            (f, _) => match f.unwrap_or(self.default_format) {
                Format::Json => self.json(command, seed),
                Format::Csv => self.csv(),
            },
        }
    }

    fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    fn json(&self, command: &str, seed: u64) -> String {
        let mut doc = Map::new();
        doc.insert("version".into(), SCHEMA_VERSION.into());
        doc.insert("command".into(), command.into());
        doc.insert("seed".into(), seed.into());
        for (k, v) in &self.summary {
            doc.insert(k.clone(), v.clone());
        }
        if self.flatten && self.rows.len() == 1 {
            for (c, v) in self.columns.iter().zip(&self.rows[0]) {
                doc.insert(c.to_string(), v.clone());
            }
        } else if !self.columns.is_empty() {
            let rows: Vec<Value> = self
                .rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.clone()))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            doc.insert("rows".into(), rows.into());
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
        s.push('\n');
        s
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Non-finite floats become `null` rather than failing serialization.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn write_out(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
