//! Deterministic CSV and JSON writers.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::Failure;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: PathBuf) -> Self {
        OutDir { root }
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf, Failure> {
        let path = self.root.join(name);
        std::fs::write(&path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, Failure> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn csv(&self, name: &str, table: &Table) -> Result<PathBuf, Failure> {
        self.write(name, &table.text)
    }
}

/// CSV with a header row; every value printed with 17 significant digits.
pub struct Table {
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { text: header.join(",") + "\n", columns: header.len() }
    }

    pub fn row(&mut self, values: &[Value]) -> Result<(), Failure> {
        assert_eq!(values.len(), self.columns, "row width must match the header");
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match *v {
                Value::Int(n) => write!(self.text, "{n}").unwrap(),
                Value::Float(x) => {
                    if !x.is_finite() {
                        return Err(Failure::numerical("non_finite", format!("non-finite value in column {i}")));
                    }
                    write!(self.text, "{x:.16e}").unwrap()
                }
            }
        }
        self.text.push('\n');
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Value {
    Int(u64),
    Float(f64),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as u64)
    }
}
