use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// A table with a stable schema: first column is the abscissa, curves follow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub figure_id: Option<u8>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: BTreeMap<String, String>,
}

impl Dataset {
    pub fn new(figure_id: Option<u8>, columns: Vec<String>) -> Self {
        Self {
            figure_id,
            columns,
            rows: Vec::new(),
            provenance: BTreeMap::new(),
        }
    }

    pub fn provenance(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.provenance.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        if let Some(id) = self.figure_id {
            let _ = writeln!(s, "# figure: {id}");
        }
        for (k, v) in &self.provenance {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(format_cell).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dataset serializes");
        s.push('\n');
        s
    }
}

/// Twelve significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        "nan".to_string()
    }
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_number(*v),
        Cell::Text(t) => t.clone(),
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
