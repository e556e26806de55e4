//! CSV assembly: `#`-prefixed metadata lines, a header row, then data rows.
//! All formatting is deterministic so identical scene + seed reruns are
//! byte-identical.

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

pub struct Report {
    command: String,
    metadata: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// Shortest round-trip decimal for a float; `inf` for unbounded quantities.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn scene_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    format!("sha256:{:x}", hasher.finalize())
}

impl Report {
    pub fn new(command: &str, header: &[&str]) -> Report {
        Report {
            command: command.to_string(),
            metadata: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    /// Provenance metadata shared by every command, placed first.
    pub fn prepend_meta(&mut self, meta: Vec<(String, String)>) {
        let tail = std::mem::replace(&mut self.metadata, meta);
        self.metadata.extend(tail);
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width mismatch");
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# command: {}", self.command).unwrap();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        writeln!(out, "{}", self.header.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }

    /// One plain two-column x/y file per numeric column, x being the first
    /// column of the table.
    pub fn emit_plots(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating plot dir {}", dir.display()))?;
        for (j, name) in self.header.iter().enumerate().skip(1) {
            let mut series = String::new();
            for row in &self.rows {
                if row[j].parse::<f64>().is_ok() && row[0].parse::<f64>().is_ok() {
                    writeln!(series, "{} {}", row[0], row[j]).unwrap();
                }
            }
            if series.is_empty() {
                continue;
            }
            let file = dir.join(format!("{}_{}.dat", self.command, name));
            std::fs::write(&file, series)
                .with_context(|| format!("writing {}", file.display()))?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!("{}: {} rows, columns [{}]", self.command, self.rows.len(), self.header.join(", "))
    }
}
