//! Table rendering with a stable, locale-free contract: CSV with
//! `#`-prefixed metadata lines, or JSON as one `{metadata, rows}` object.
//! Identical inputs produce byte-identical output; numbers are rendered
//! with 17 significant digits.

use std::path::Path;

use crate::error::{Error, Result};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Value {
    Number(f64),
    Integer(i64),
    Text(String),
    Flag(bool),
    /// Not-applicable cell: empty in CSV, null in JSON.
    Empty,
}

/// Ordered metadata plus one rectangular table.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Document {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

fn csv_cell(value: &Value) -> String {
    match value {
        Value::Number(x) => format!("{x:.16e}"),
        Value::Integer(i) => i.to_string(),
        Value::Text(s) => s.clone(),
        Value::Flag(b) => b.to_string(),
        Value::Empty => String::new(),
    }
}

pub(crate) fn render_csv(doc: &Document) -> String {
    let mut out = String::new();
    for (key, value) in &doc.metadata {
        out.push_str(&format!("# {key} = {value}\n"));
    }
    out.push_str(&doc.columns.join(","));
    out.push('\n');
    for row in &doc.rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn json_cell(value: &Value) -> serde_json::Value {
    match value {
        Value::Number(x) => serde_json::Number::from_f64(*x)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null),
        Value::Integer(i) => serde_json::Value::from(*i),
        Value::Text(s) => serde_json::Value::from(s.as_str()),
        Value::Flag(b) => serde_json::Value::from(*b),
        Value::Empty => serde_json::Value::Null,
    }
}

pub(crate) fn render_json(doc: &Document) -> String {
    let mut metadata = serde_json::Map::new();
    for (key, value) in &doc.metadata {
        metadata.insert(key.clone(), serde_json::Value::from(value.as_str()));
    }
    let rows: Vec<serde_json::Value> = doc
        .rows
        .iter()
        .map(|row| {
            let mut obj = serde_json::Map::new();
            for (column, cell) in doc.columns.iter().zip(row.iter()) {
                obj.insert((*column).to_string(), json_cell(cell));
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    let mut top = serde_json::Map::new();
    top.insert("metadata".into(), serde_json::Value::Object(metadata));
    top.insert("rows".into(), serde_json::Value::Array(rows));
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(top))
        .expect("document serialization cannot fail");
    text.push('\n');
    text
}

/// Write to the given path, or to standard output when none is given.
pub(crate) fn write_output(content: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| {
            Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
