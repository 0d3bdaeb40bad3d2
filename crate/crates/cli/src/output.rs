//! Report emission: significant-digit rounding, JSON/CSV rendering, and the
//! stdout/file switch. JSON objects are b-tree maps, so two runs over the
//! same data serialize byte-identically.

use std::path::Path;

use bellsep_core::error::{Error, Result};
use serde_json::{json, Value};

/// Output format of every command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Rounds to 9 significant digits — below every tolerance in the library,
/// above double-precision noise.
fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.8e}").parse().expect("scientific notation round-trips")
}

/// Recursively rounds every float in the report; integers stay exact.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if !n.is_u64() && !n.is_i64() {
                if let Some(f) = n.as_f64() {
                    *v = json!(round_sig(f));
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn csv_scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => csv_escape(s),
        _ => unreachable!("flattened values are scalars"),
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), item, rows);
            }
        }
        Value::Object(map) => {
            for (k, item) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, item, rows);
            }
        }
        scalar => rows.push((prefix.to_string(), csv_scalar(scalar))),
    }
}

/// Two-column `key,value` CSV holding the same numbers as the JSON form.
pub fn to_csv(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let mut out = String::from("key,value\n");
    for (k, val) in rows {
        out.push_str(&csv_escape(&k));
        out.push(',');
        out.push_str(&val);
        out.push('\n');
    }
    out
}

/// Rounds, renders, and writes the report to stdout or a file.
pub fn emit(mut report: Value, format: OutputFormat, out: Option<&Path>) -> Result<()> {
    round_numbers(&mut report);
    let text = match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            s
        }
        OutputFormat::Csv => to_csv(&report),
    };
    match out {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}
