//! JSON and CSV report serialization. Every non-integer number is written
//! with exactly six decimal places.

use std::io::Write;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::error::{Error, Result};

fn fix_decimals(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if !(n.is_i64() || n.is_u64()) {
                if let Some(x) = n.as_f64() {
                    *v = fixed_number(x);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(fix_decimals),
        Value::Object(map) => map.values_mut().for_each(fix_decimals),
        _ => {}
    }
}

fn fixed_number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    // -0.000000 reads oddly and breaks byte-equality across platforms.
    let s = format!("{x:.6}");
    let s = if s == "-0.000000" { "0.000000".to_owned() } else { s };
    s.parse::<Number>().map(Value::Number).unwrap_or(Value::Null)
}

/// Serializes `value` to a JSON value with fixed six-decimal floats.
pub fn to_value<T: Serialize>(value: &T) -> Result<Value> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Io(e.into()))?;
    fix_decimals(&mut v);
    Ok(v)
}

/// Pretty JSON text with fixed six-decimal floats and a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.into()))?;
    s.push('\n');
    Ok(s)
}

/// Formats a float cell for the companion CSV tables.
pub fn fmt6(x: f64) -> String {
    if x.is_finite() {
        let s = format!("{x:.6}");
        if s == "-0.000000" {
            "0.000000".to_owned()
        } else {
            s
        }
    } else {
        String::new()
    }
}

/// A flat table destined for a companion CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn six_decimals() {
        let s = to_json_string(&json!({"a": 0.5, "b": 3, "c": [1.0/3.0, -0.0000001], "d": f64::NAN})).unwrap();
        assert!(s.contains("\"a\": 0.500000"), "{s}");
        assert!(s.contains("\"b\": 3"));
        assert!(s.contains("0.333333"));
        assert!(s.contains("0.000000"));
        assert!(!s.contains("-0.000000"));
        assert!(s.contains("\"d\": null"));
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec!["1".into(), fmt6(0.25)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,0.250000\n");
    }
}
