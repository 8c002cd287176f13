//! Diagnostics CSV files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rotwave_core::diagnostics::DiagnosticsRecord;

use crate::error::{HarnessError, Result};

pub const COLUMNS: [&str; 8] = ["t", "energy", "mean_h", "max_abs_h", "w4inf", "hsN", "weighted_profile", "curl_residual_max"];

/// Renders one record; values use the shortest exact decimal form.
pub fn format_row(r: &DiagnosticsRecord) -> String {
    [r.t, r.energy, r.mean_h, r.max_abs_h, r.w4inf_norm, r.hs_norm, r.weighted_profile_norm, r.curl_residual_max]
        .iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvWriter {
    /// Creates the file and writes the comment line and column header.
    pub fn create(path: &Path, n_sobolev: u32, iota: f64) -> Result<Self> {
        let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        let mut w = Self { path: path.to_path_buf(), out: BufWriter::new(file) };
        w.line(&format!(
            "# hsN: N = {n_sobolev}; weighted_profile: iota = {iota}, weight x - L/2 (box-centered; periodic approximation, valid while the solution stays localized)"
        ))?;
        w.line(&COLUMNS.join(","))?;
        Ok(w)
    }

    pub fn record(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        self.line(&format_row(r))
    }

    /// A trailing `# ` comment line.
    pub fn comment(&mut self, text: &str) -> Result<()> {
        self.line(&format!("# {text}"))
    }

    fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}").map_err(|e| HarnessError::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| HarnessError::io(&self.path, e))
    }
}

/// The data rows of a diagnostics CSV (comments and header removed).
pub fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("t,")).collect()
}
