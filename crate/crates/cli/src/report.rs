//! Report writers: JSON with 17 significant digits and CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde_json::{json, Value};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A float as a JSON value; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    json!(x)
}

pub fn complex(z: Complex<f64>) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON in which every float carries 17 significant digits.
pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    emit(v, 0, &mut out);
    out.push('\n');
    out
}

fn emit(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Number(n) if n.is_f64() => out.push_str(&fmt_float(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(items) if !items.is_empty() => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                emit(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", pad(depth));
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(depth + 1), Value::String(k.clone()));
                emit(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", pad(depth));
        }
        other => out.push_str(&other.to_string()),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Writes a CSV table. Floats are formatted by the caller.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Input(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        let v = json!({ "x": 0.1, "n": 3, "nan": num(f64::NAN), "list": [1.0, -2.5e-300] });
        let s = to_json(&v);
        assert!(s.contains("\"x\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("\"nan\": null"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
        assert_eq!(back["list"][1].as_f64(), Some(-2.5e-300));
    }
}
