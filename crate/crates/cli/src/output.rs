//! Rendering of report records as JSON lines, CSV or aligned text.

use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Reports collected for one run, in output order.
#[derive(Debug, Default)]
pub struct Records {
    items: Vec<Value>,
}

impl Records {
    pub fn push(&mut self, record: &impl Serialize) -> anyhow::Result<()> {
        self.items.push(serde_json::to_value(record)?);
        Ok(())
    }

    /// False if any record carries `"status": "fail"`.
    pub fn all_passed(&self) -> bool {
        !self
            .items
            .iter()
            .any(|r| r.get("status").and_then(Value::as_str) == Some("fail"))
    }

    pub fn render(&self, format: Format, out: &mut impl Write) -> anyhow::Result<()> {
        match format {
            Format::Json => {
                for r in &self.items {
                    writeln!(out, "{}", serde_json::to_string(r)?)?;
                }
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
                for group in groups(&self.items) {
                    w.write_record(&group.columns)?;
                    for row in &group.rows {
                        w.write_record(row)?;
                    }
                }
                w.flush()?;
            }
            Format::Text => {
                for (i, group) in groups(&self.items).iter().enumerate() {
                    if i > 0 {
                        writeln!(out)?;
                    }
                    write_aligned(out, &group.columns, &group.rows)?;
                }
            }
        }
        Ok(())
    }
}

/// Nested objects become dotted columns; arrays are shown by length.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => out.push((prefix.to_string(), items.len().to_string())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

struct Group {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// Consecutive records with the same columns share a header.
fn groups(items: &[Value]) -> Vec<Group> {
    let mut out: Vec<Group> = Vec::new();
    for item in items {
        let mut cells = Vec::new();
        flatten("", item, &mut cells);
        let (columns, row): (Vec<String>, Vec<String>) = cells.into_iter().unzip();
        match out.last_mut() {
            Some(g) if g.columns == columns => g.rows.push(row),
            _ => out.push(Group {
                columns,
                rows: vec![row],
            }),
        }
    }
    out
}

pub fn write_aligned(
    out: &mut impl Write,
    columns: &[String],
    rows: &[Vec<String>],
) -> io::Result<()> {
    let mut widths: Vec<usize> = columns.iter().map(|c| c.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    writeln!(out, "{}", line(columns))?;
    for row in rows {
        writeln!(out, "{}", line(row))?;
    }
    Ok(())
}
