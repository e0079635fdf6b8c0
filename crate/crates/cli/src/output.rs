//! CSV tables with a metadata header, plus JSON mirrors.

use serde::Serialize;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Run metadata written at the top of every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub program: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub tolerance: f64,
    pub eta: f64,
    pub extrapolated_etas: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn write_csv<W: Write>(mut w: W, meta: &Metadata, table: &Table) -> io::Result<()> {
    writeln!(w, "# program: {} {}", meta.program, meta.version)?;
    writeln!(w, "# command: {}", meta.command)?;
    writeln!(w, "# config_sha256: {}", meta.config_sha256)?;
    writeln!(w, "# tolerance: {}", format_float(meta.tolerance))?;
    writeln!(w, "# eta: {}", format_float(meta.eta))?;
    if let Some(e) = &meta.extrapolated_etas {
        let s: Vec<String> = e.iter().map(|v| format_float(*v)).collect();
        writeln!(w, "# extrapolated_from_eta: {}", s.join(","))?;
    }
    for n in &meta.notes {
        writeln!(w, "# note: {n}")?;
    }
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Mirror<'a> {
    metadata: &'a Metadata,
    columns: &'a [String],
    rows: &'a [Vec<f64>],
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`; returns the CSV path.
pub fn emit(dir: &Path, name: &str, meta: &Metadata, table: &Table) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{name}.csv"));
    let mut buf = Vec::new();
    write_csv(&mut buf, meta, table)?;
    fs::write(&csv, buf)?;
    let mirror = Mirror {
        metadata: meta,
        columns: &table.columns,
        rows: &table.rows,
    };
    let json = serde_json::to_vec_pretty(&mirror).map_err(io::Error::other)?;
    fs::write(dir.join(format!("{name}.json")), json)?;
    Ok(csv)
}
