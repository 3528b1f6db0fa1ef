//! Row tables and their JSON / CSV renderings.

use std::io::Write;

use crate::config::{Format, SweepConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Str(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Str(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Str(x.to_string())
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn float_text(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn json(&self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => float_text(*x),
            Cell::Float(x) => json_string(&float_text(*x)),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Str(s) => json_string(s),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => float_text(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Str(s) => s.clone(),
        }
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, config: &SweepConfig, extra_meta: &[(&'static str, String)]) -> Vec<u8> {
        match config.format {
            Format::Json => self.to_json(config, extra_meta).into_bytes(),
            Format::Csv => self.to_csv(),
        }
    }

    fn to_json(&self, config: &SweepConfig, extra_meta: &[(&'static str, String)]) -> String {
        let settings: Vec<String> = config
            .describe()
            .iter()
            .chain(extra_meta)
            .map(|(k, v)| format!("{}:{}", json_string(k), json_string(v)))
            .collect();
        let mut out = format!(
            "{{\"meta\":{{\"config\":{{{}}},\"seed\":{},\"version\":{}}},\"rows\":[",
            settings.join(","),
            config.seed,
            json_string(env!("CARGO_PKG_VERSION"))
        );
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            let fields: Vec<String> =
                self.columns.iter().zip(row).map(|(k, v)| format!("{}:{}", json_string(k), v.json())).collect();
            out.push('{');
            out.push_str(&fields.join(","));
            out.push('}');
        }
        out.push_str("\n]}\n");
        out
    }

    fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

pub fn emit(bytes: &[u8], config: &SweepConfig) -> std::io::Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}
