//! Report envelope and its canonical JSON form.
//!
//! Keys are sorted, output is indented by two spaces, and every float is
//! written in exponent form with 17 significant digits so it parses back
//! to the same `f64`. Serializing, parsing and serializing again gives the
//! same bytes.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub tool_version: String,
    pub command: String,
    pub inputs_digest: String,
    pub payload: Value,
}

impl ReportEnvelope {
    pub fn new(command: &str, inputs_digest: String, payload: &impl Serialize) -> CliResult<Self> {
        let payload = serde_json::to_value(payload)
            .map_err(|e| CliError::validation("serialization", e.to_string()))?;
        Ok(Self {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            inputs_digest,
            payload,
        })
    }

    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("envelope serializes");
        to_canonical_json(&value)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::validation("parse", e.to_string()))
    }

    /// The payload as its domain type.
    pub fn payload_as<T: DeserializeOwned>(&self) -> CliResult<T> {
        serde_json::from_value(self.payload.clone())
            .map_err(|e| CliError::validation("parse", e.to_string()))
    }
}

pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        // keep the sign of negative zero out of reports
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

fn write_number(n: &Number, out: &mut String) {
    if n.is_f64() {
        out.push_str(&format_float(n.as_f64().expect("f64 number")));
    } else {
        out.push_str(&n.to_string());
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(n, out),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(item, indent + 2, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write_value(&map[*k], indent + 2, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(-0.0), "0.0000000000000000e0");
        for x in [0.1, 1.0 / 3.0, 2.662_905_519_356_543e-5, 1e300, -7.25, f64::MIN_POSITIVE] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17);
        }
    }

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let v = serde_json::json!({
            "z": [1, 2.5, -3],
            "a": {"y": 0.1, "b": null, "c": "text \"q\""},
            "m": [],
            "e": {},
            "t": true
        });
        let once = to_canonical_json(&v);
        let back: Value = serde_json::from_str(&once).unwrap();
        assert_eq!(to_canonical_json(&back), once);
        assert!(once.find("\"a\"").unwrap() < once.find("\"z\"").unwrap());
    }
}
