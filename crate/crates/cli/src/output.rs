use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;

/// Shortest round-trip form that always shows a decimal point.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), num)
}

/// Human table printed on stdout plus optional machine formats.
pub struct Report {
    title: String,
    seed: u64,
    lines: Vec<(String, String)>,
    table: Option<(Vec<String>, Vec<Vec<String>>)>,
}

impl Report {
    pub fn new(title: impl Into<String>, seed: u64) -> Self {
        Self { title: title.into(), seed, lines: Vec::new(), table: None }
    }

    pub fn line(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn table(&mut self, header: &[&str], rows: Vec<Vec<String>>) -> &mut Self {
        self.table = Some((header.iter().map(|h| h.to_string()).collect(), rows));
        self
    }

    pub fn print(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# {}  seed={}", self.title, self.seed)?;
        for (k, v) in &self.lines {
            writeln!(w, "{k}={v}")?;
        }
        if let Some((header, rows)) = &self.table {
            let mut widths: Vec<usize> = header.iter().map(String::len).collect();
            for row in rows {
                for (i, cell) in row.iter().enumerate() {
                    widths[i] = widths[i].max(cell.len());
                }
            }
            let fmt = |cells: &[String]| {
                cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ")
            };
            writeln!(w, "{}", fmt(header).trim_end())?;
            for row in rows {
                writeln!(w, "{}", fmt(row).trim_end())?;
            }
        }
        Ok(())
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
