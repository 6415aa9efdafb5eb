//! Plain numeric CSV with a `# key=value` comment preamble.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a value
//! read back is bit-identical to the value written.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    /// Preamble entries in file order.
    pub comments: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn comment(mut self, key: &str, value: impl ToString) -> Self {
        self.comments.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn comment_map(&self) -> BTreeMap<&str, &str> {
        self.comments
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let map = self.comment_map();
        let raw = map
            .get(key)
            .ok_or_else(|| Error::Parse(format!("missing `# {key}=` comment")))?;
        parse_f64(raw)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.comments {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{}", fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Table::default();
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    table
                        .comments
                        .push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !header_seen {
                table.columns = line.split(',').map(|c| c.trim().to_string()).collect();
                header_seen = true;
                continue;
            }
            let row: Result<Vec<f64>> = line.split(',').map(|c| parse_f64(c.trim())).collect();
            let row = row.map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if row.len() != table.columns.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 1,
                    table.columns.len(),
                    row.len()
                )));
            }
            table.rows.push(row);
        }
        if !header_seen {
            return Err(Error::Parse("no header row".into()));
        }
        Ok(table)
    }
}

/// Shortest representation that parses back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "nan" | "NaN" => Ok(f64::NAN),
        _ => s
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("not a number: `{s}`"))),
    }
}
