//! Deterministic command reports.
//!
//! Every number is rounded to 12 significant digits before it is stored and
//! magnitudes below 1e-12 are written as 0, so reports are byte-identical
//! across runs and free of floating-point dust. Keys keep insertion order.

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

pub const SIGNIFICANT_DIGITS: usize = 12;
const ZERO_BELOW: f64 = 1e-12;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x.abs() < ZERO_BELOW {
        return 0.0;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Text form of a rounded number: integers without a trailing ".0".
pub fn fmt_num(x: f64) -> String {
    match num(x) {
        Value::Number(n) => trim_float(&n.to_string()),
        _ => x.to_string(),
    }
}

fn trim_float(s: &str) -> String {
    s.strip_suffix(".0").unwrap_or(s).to_string()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    command: String,
    args: Map<String, Value>,
    results: Map<String, Value>,
    diagnostics: Map<String, Value>,
    notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            args: Map::new(),
            results: Map::new(),
            diagnostics: Map::new(),
            notes: Vec::new(),
        }
    }

    pub fn arg(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.args.insert(key.into(), v.into());
        self
    }

    pub fn result(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.results.insert(key.into(), v.into());
        self
    }

    pub fn diag(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.diagnostics.insert(key.into(), v.into());
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn results(&self) -> &Map<String, Value> {
        &self.results
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("args".into(), Value::Object(self.args.clone()));
        m.insert("results".into(), Value::Object(self.results.clone()));
        m.insert("diagnostics".into(), Value::Object(self.diagnostics.clone()));
        m.insert(
            "notes".into(),
            Value::Array(self.notes.iter().cloned().map(Value::String).collect()),
        );
        Value::Object(m)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.to_value()).expect("serializable") + "\n",
            Format::Text => {
                let mut out = String::new();
                out.push_str(&format!("command: {}\n", self.command));
                for (title, map) in [
                    ("args", &self.args),
                    ("results", &self.results),
                    ("diagnostics", &self.diagnostics),
                ] {
                    if map.is_empty() {
                        continue;
                    }
                    out.push_str(title);
                    out.push_str(":\n");
                    write_map(&mut out, map, 1);
                }
                if !self.notes.is_empty() {
                    out.push_str("notes:\n");
                    for n in &self.notes {
                        out.push_str(&format!("  - {n}\n"));
                    }
                }
                out
            }
        }
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => trim_float(&n.to_string()),
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Array(a) => format!("[{}]", a.iter().map(inline).collect::<Vec<_>>().join(", ")),
        Value::Object(o) => format!(
            "{{{}}}",
            o.iter()
                .map(|(k, v)| format!("{k}: {}", inline(v)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

/// Arrays whose elements are scalars or arrays of scalars print on one line.
fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a
            .iter()
            .all(|x| is_scalar(x) || matches!(x, Value::Array(b) if b.iter().all(is_scalar))),
        Value::Object(m) => m.is_empty(),
        _ => is_scalar(v),
    }
}

fn write_map(out: &mut String, map: &Map<String, Value>, depth: usize) {
    let pad = "  ".repeat(depth);
    for (k, v) in map {
        if is_flat(v) {
            out.push_str(&format!("{pad}{k}: {}\n", inline(v)));
        } else {
            out.push_str(&format!("{pad}{k}:\n"));
            write_value(out, v, depth + 1);
        }
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => write_map(out, m, depth),
        Value::Array(items) => {
            for item in items {
                match item {
                    Value::Object(m) if !m.is_empty() => {
                        let mut first = true;
                        for (k, x) in m {
                            let lead = if first {
                                format!("{pad}- ")
                            } else {
                                format!("{pad}  ")
                            };
                            first = false;
                            if is_flat(x) {
                                out.push_str(&format!("{lead}{k}: {}\n", inline(x)));
                            } else {
                                out.push_str(&format!("{lead}{k}:\n"));
                                write_value(out, x, depth + 2);
                            }
                        }
                    }
                    other => out.push_str(&format!("{pad}- {}\n", inline(other))),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", inline(other))),
    }
}
