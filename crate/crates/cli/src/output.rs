//! Deterministic CSV/JSON emission.
//!
//! Every artifact starts with the full resolved parameter set and the tool
//! version: CSV as `# key = value` comment lines, JSON as a `meta` object.
//! Numbers are printed in Rust's shortest round-trip representation.

use std::io::Write;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A finished table: metadata, column names, and rows of values.
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(meta: Vec<(String, String)>, columns: &[&str]) -> Self {
        Self {
            meta,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for (key, value) in &self.meta {
            writeln!(out, "# {key} = {value}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(value_to_csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut meta = Map::new();
        for (key, value) in &self.meta {
            // Numbers stay numbers in JSON where they parse exactly.
            let parsed = value
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map(Value::Number)
                .unwrap_or_else(|| Value::String(value.clone()));
            meta.insert(key.clone(), parsed);
        }
        let doc = json!({
            "meta": Value::Object(meta),
            "columns": self.columns,
            "rows": self.rows,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)
    }
}

fn value_to_csv(v: &Value) -> String {
    match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Null => "nan".to_string(),
        other => other.to_string(),
    }
}

/// f64 -> JSON value; NaN and infinities become null (printed as "nan" in CSV).
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Shortest round-trip decimal form for header lines.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
