//! Tables and metadata, rendered as CSV or JSON.
//!
//! Every file is built in memory first and written only once the whole command has
//! succeeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<i8> for Cell {
    fn from(v: i8) -> Self {
        Cell::Int(v.into())
    }
}

/// Shortest decimal that parses back to the same `f64`. Very large and very small
/// magnitudes switch to exponent notation.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
        }
    }
}

/// Ordered `key: value` pairs written ahead of every table.
#[derive(Debug, Clone, Default)]
pub struct Meta(Vec<(String, Value)>);

impl Meta {
    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn with(&self, extra: &[(&str, Value)]) -> Meta {
        let mut m = self.clone();
        for (k, v) in extra {
            m.push(k, v.clone());
        }
        m
    }

    fn comment_value(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => match n.as_f64() {
                Some(f) if !n.is_i64() && !n.is_u64() => fmt_f64(f),
                _ => n.to_string(),
            },
            other => other.to_string(),
        }
    }

    fn json(&self) -> Value {
        Value::Object(self.0.iter().cloned().collect::<Map<_, _>>())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub meta: Meta,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, meta: Meta, header: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            meta,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta.0 {
            writeln!(s, "# {k}: {}", Meta::comment_value(v)).unwrap();
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        let doc = json!({
            "meta": self.meta.json(),
            "columns": self.header,
            "rows": rows,
        });
        serde_json::to_string_pretty(&doc).expect("tables serialize") + "\n"
    }

    pub fn render(&self, format: Format) -> (String, String) {
        match format {
            Format::Csv => (format!("{}.csv", self.name), self.to_csv()),
            Format::Json => (format!("{}.json", self.name), self.to_json()),
        }
    }
}

/// Files produced by a command, relative to the output directory.
#[derive(Debug, Default)]
pub struct Artifacts(pub Vec<(String, String)>);

impl Artifacts {
    pub fn add_table(&mut self, table: &Table, format: Format) {
        self.0.push(table.render(format));
    }

    pub fn add(&mut self, name: String, contents: String) {
        self.0.push((name, contents));
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, contents) in &self.0 {
            let path = dir.join(name);
            std::fs::write(&path, contents)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-7, 6.02e23, 3.0753, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(1e-7), "1e-7");
    }

    #[test]
    fn csv_layout() {
        let mut meta = Meta::default();
        meta.push("g", 9.81);
        meta.push("tool", "x");
        let mut t = Table::new("d", meta, &["k", "ok"]);
        t.push(vec![1.0.into(), true.into()]);
        assert_eq!(t.to_csv(), "# g: 9.81\n# tool: x\nk,ok\n1,true\n");
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["rows"][0][1], json!(true));
        assert_eq!(v["meta"]["g"], json!(9.81));
    }
}
