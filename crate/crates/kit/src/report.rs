//! Tabular report with a metadata preamble. CSV is canonical (RFC 4180
//! quoting, `# meta:` comment lines before the header); JSON mirrors the same
//! content for machine consumption. Floats print with Rust's shortest
//! round-trip formatting; non-finite values become the strings `inf`,
//! `-inf`, `nan` in both formats (JSON numbers cannot carry them).

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => float_repr(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => csv_quote(s),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => serde_json::Value::from(*v),
            Cell::Float(v) => {
                if v.is_finite() {
                    serde_json::Value::from(*v)
                } else {
                    serde_json::Value::from(float_repr(*v))
                }
            }
            Cell::Bool(v) => serde_json::Value::from(*v),
            Cell::Text(s) => serde_json::Value::from(s.clone()),
        }
    }
}

fn float_repr(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# meta: {k}={v}");
        }
        let _ = writeln!(
            out,
            "{}",
            self.columns
                .iter()
                .map(|c| csv_quote(c))
                .collect::<Vec<_>>()
                .join(",")
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{}",
                row.iter().map(|c| c.csv()).collect::<Vec<_>>().join(",")
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let meta: serde_json::Map<String, serde_json::Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::from(v.clone())))
            .collect();
        let doc = serde_json::json!({
            "meta": meta,
            "columns": self.columns,
            "rows": self.rows.iter().map(|row| {
                row.iter().map(|c| c.json()).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report serialization");
        text.push('\n');
        text
    }
}
