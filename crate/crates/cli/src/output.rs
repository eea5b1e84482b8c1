//! Emission helpers. Every number is rounded to 12 significant digits.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::Failure;

pub fn round12(x: f64) -> f64 {
    if x == 0.0 {
        // Drops the sign of negative zero.
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(r) = serde_json::Number::from_f64(round12(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut v = serde_json::to_value(value).map_err(|e| Failure::internal(e.to_string()))?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Failure::internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `out` when given, otherwise to standard output.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let res = match out {
        Some(path) => File::create(path).and_then(|mut f| f.write_all(bytes)),
        None => io::stdout().lock().write_all(bytes),
    };
    res.map_err(|e| Failure::internal(format!("write failed: {e}")))
}

pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> Result<String, Failure> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::internal(e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| round12(x).to_string()))
            .map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::internal(e.to_string()))
}
