//! Schema-stable CSV and JSON rendering.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::config::Format;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Maybe(Option<f64>),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Maybe(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Maybe(Some(v)) => format_float(*v),
            Cell::Maybe(None) => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Float(v) | Cell::Maybe(Some(v)) => json_float(*v),
            Cell::Maybe(None) => Value::Null,
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        let plain = format!("{v}");
        let sci = format!("{v:e}");
        if sci.len() < plain.len() {
            sci
        } else {
            plain
        }
    } else {
        format!("{v}")
    }
}

fn json_float(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub config: BTreeMap<String, Value>,
    /// Scalar facts about the whole table (spread, notes).
    pub meta: Vec<(&'static str, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Render a single row as a flat JSON object instead of a `rows` array.
    pub single: bool,
}

impl Report {
    pub fn new(
        command: &'static str,
        config: BTreeMap<String, Value>,
        columns: Vec<&'static str>,
    ) -> Self {
        Self {
            command,
            config,
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
            single: false,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema_version={SCHEMA_VERSION}\n"));
        out.push_str(&format!("# command={}\n", self.command));
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={}\n", v.to_csv()));
        }
        for (k, v) in &self.config {
            out.push_str(&format!("# config.{k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> String {
        let mut obj = Map::new();
        obj.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        obj.insert("command".into(), Value::from(self.command));
        for (k, v) in &self.meta {
            obj.insert((*k).into(), v.to_json());
        }
        let row_object = |row: &Vec<Cell>| {
            let mut m = Map::new();
            for (c, v) in self.columns.iter().zip(row) {
                m.insert((*c).into(), v.to_json());
            }
            m
        };
        if self.single && self.rows.len() == 1 {
            obj.extend(row_object(&self.rows[0]));
        } else {
            obj.insert(
                "rows".into(),
                Value::Array(
                    self.rows
                        .iter()
                        .map(|r| Value::Object(row_object(r)))
                        .collect(),
                ),
            );
        }
        let config: Map<String, Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        obj.insert("config".into(), Value::Object(config));
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("report serializes");
        s.push('\n');
        s
    }
}
