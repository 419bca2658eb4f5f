//! CSV and JSON persistence of sweep results.

use std::path::Path;

use serde_json::{Map, Value};

use super::config::{Config, OutputFormat};
use super::run::SweepResult;
use crate::error::{Error, Result};

pub const DIAGNOSTIC_COLUMNS: [&str; 4] = ["kernel_dim", "residual", "wall_ms", "error"];

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn header(result: &SweepResult) -> Vec<String> {
    result
        .axis_names
        .iter()
        .chain(&result.columns)
        .cloned()
        .chain(DIAGNOSTIC_COLUMNS.iter().map(|s| s.to_string()))
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn to_csv(result: &SweepResult) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(result)).expect("in-memory write");
    for row in &result.rows {
        let mut fields: Vec<String> = row.axes.iter().map(|&x| format_float(x)).collect();
        fields.extend(row.values.iter().map(|&v| opt(v)));
        fields.push(row.kernel_dim.map(|k| k.to_string()).unwrap_or_default());
        fields.push(opt(row.residual));
        fields.push(opt(row.wall_ms));
        fields.push(row.error.clone().unwrap_or_default());
        w.write_record(&fields).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn number(x: Option<f64>) -> Value {
    x.and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

/// `{"request": <config>, "rows": [{column: value, ...}, ...]}`.
pub fn to_json(result: &SweepResult, request: &Config) -> Value {
    let rows: Vec<Value> = result
        .rows
        .iter()
        .map(|row| {
            let mut rec = Map::new();
            for (name, &x) in result.axis_names.iter().zip(&row.axes) {
                rec.insert(name.clone(), number(Some(x)));
            }
            for (name, &v) in result.columns.iter().zip(&row.values) {
                rec.insert(name.clone(), number(v));
            }
            rec.insert("kernel_dim".into(), row.kernel_dim.map_or(Value::Null, Value::from));
            rec.insert("residual".into(), number(row.residual));
            rec.insert("wall_ms".into(), number(row.wall_ms));
            rec.insert("error".into(), row.error.clone().map_or(Value::Null, Value::String));
            Value::Object(rec)
        })
        .collect();
    let mut doc = Map::new();
    doc.insert(
        "request".into(),
        serde_json::to_value(request).expect("config serializes"),
    );
    doc.insert("rows".into(), Value::Array(rows));
    Value::Object(doc)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn export(result: &SweepResult, request: &Config, format: OutputFormat, path: &Path) -> Result<()> {
    let bytes = match format {
        OutputFormat::Csv => to_csv(result),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&to_json(result, request)).expect("json serializes");
            s.push('\n');
            s.into_bytes()
        }
    };
    write_file(path, &bytes)
}
