//! Text formats for sequences and tabular reports.

use crate::error::{Error, Result};
use crate::linear::RealSequence;
use std::fmt::Write;

/// Rows of floats under named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Shortest round-trip formatting, so every value parses back exactly.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

/// Prefixes every line of `json` with `# ` so it can head a CSV file.
pub fn comment_block(label: &str, json: &str) -> String {
    let mut out = String::new();
    for line in json.lines() {
        let _ = writeln!(out, "# {label}{line}");
    }
    out
}

pub fn sequence_to_csv(c: &RealSequence) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in c.values.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", format_float(*v));
    }
    out
}

/// Parses `index,value` CSV; `#` lines are skipped and indices must run 0, 1, 2, ….
pub fn sequence_from_csv(text: &str, scale: i32, origin: f64) -> Result<RealSequence> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    match lines.next() {
        Some((_, h)) if h.replace(' ', "") == "index,value" => {}
        Some((n, h)) => {
            return Err(Error::invalid(format!(
                "line {}: expected header index,value, got {h:?}",
                n + 1
            )))
        }
        None => return Err(Error::EmptyInput),
    }
    let mut values = Vec::new();
    for (n, line) in lines {
        let bad = || Error::invalid(format!("line {}: cannot parse {line:?}", n + 1));
        let (i, v) = line.split_once(',').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        if i != values.len() {
            return Err(Error::invalid(format!(
                "line {}: expected index {}, got {i}",
                n + 1,
                values.len()
            )));
        }
        values.push(v);
    }
    RealSequence::new(values, scale, origin)
}
