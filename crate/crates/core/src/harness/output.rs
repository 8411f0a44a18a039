//! CSV tables with JSON sidecars.
//!
//! Floats are written with Rust's shortest round-trip formatting, and the
//! sidecars hold no timestamps, so identical inputs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::Result;

/// Overrides the output directory (default `out`).
pub const OUTPUT_DIR_ENV: &str = "MDOA_OUTPUT_DIR";

pub fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes named tables into one directory and remembers what it wrote.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn table(&mut self, stem: &str, table: &Table, meta: Value) -> Result<PathBuf> {
        let csv_path = self.dir.join(format!("{stem}.csv"));
        table.write_csv(&csv_path)?;
        let sidecar = json!({
            "data": format!("{stem}.csv"),
            "columns": table.columns,
            "rows": table.len(),
            "crate_version": env!("CARGO_PKG_VERSION"),
            "meta": meta,
        });
        self.written.push(csv_path.clone());
        self.json(stem, &sidecar)?;
        Ok(csv_path)
    }

    /// Writes a standalone `<stem>.json`.
    pub fn json(&mut self, stem: &str, value: &Value) -> Result<PathBuf> {
        let path = self.dir.join(format!("{stem}.json"));
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text)?;
        if !self.written.contains(&path) {
            self.written.push(path.clone());
        }
        Ok(path)
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn into_files(self) -> Vec<PathBuf> {
        self.written
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1e-10, 2.0, -3.25e17, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn writes_csv_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path().join("run")).unwrap();
        let mut t = Table::new(["a", "b"]);
        t.push_f64(&[1.0, 0.5]);
        w.table("x", &t, json!({"k": 1})).unwrap();
        let text = fs::read_to_string(dir.path().join("run/x.csv")).unwrap();
        assert_eq!(text, "a,b\n1.0,0.5\n");
        let side: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("run/x.json")).unwrap())
                .unwrap();
        assert_eq!(side["rows"], 1);
        assert_eq!(side["meta"]["k"], 1);
        assert_eq!(w.files().len(), 2);
    }
}
