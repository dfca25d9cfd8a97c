//! CSV formatting, atomic file writes and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::oracle::LedgerTotals;

/// 17 significant digits: round-trips every double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats a finite double, or fails: CSV payloads never carry NaN/Inf.
pub fn finite(x: f64, what: &str) -> Result<String> {
    if x.is_finite() {
        Ok(fmt_f64(x))
    } else {
        Err(invalid(format!("non-finite value {x} in column {what}")))
    }
}

/// `NA` for absent values (e.g. a bound evaluated outside its range).
pub fn or_na(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map_or_else(|| "NA".to_string(), fmt_f64)
}

/// In-memory CSV table.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes via a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub master_seed: Option<u64>,
    pub version: String,
    pub wall_time_seconds: f64,
    pub ledger: Option<LedgerTotals>,
    pub outputs: Vec<String>,
}

/// Collects the files a command writes into one output directory, then
/// finishes with a single `manifest.json`.
pub struct OutputDir {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl OutputDir {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), outputs: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| invalid(e.to_string()))?;
        s.push('\n');
        self.write(name, &s)
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<()> {
        manifest.outputs = self.outputs;
        let mut s = serde_json::to_string_pretty(&manifest).map_err(|e| invalid(e.to_string()))?;
        s.push('\n');
        write_atomic(&self.dir.join("manifest.json"), s.as_bytes())
    }
}
