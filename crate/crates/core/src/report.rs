//! Machine-readable experiment reports: JSON summaries and flat CSV tables,
//! written atomically (temp file + rename) so partial output never replaces
//! a previous report.

use crate::analysis::OperatorReport;
use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

/// One verification suite outcome: a named residual against its tolerance.
#[derive(Clone, Debug, serde::Serialize)]
pub struct VerifySuite {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerifySuite {
    pub fn new(name: &str, residual: f64, tolerance: f64) -> VerifySuite {
        VerifySuite {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
        }
    }
}

/// Top-level verification report: a labelled collection of suites.
#[derive(Clone, Debug, serde::Serialize)]
pub struct VerifyReport {
    pub label: String,
    pub suites: Vec<VerifySuite>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn new(label: &str, suites: Vec<VerifySuite>) -> VerifyReport {
        let pass = suites.iter().all(|s| s.pass);
        VerifyReport {
            label: label.to_string(),
            suites,
            pass,
        }
    }
}

/// Fixed-width decimal with 17 significant digits, enough to round-trip f64.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.17e}")
    } else {
        format!("{v}")
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Input(format!("writing {}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(bytes).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    std::fs::rename(&tmp, path).map_err(io_err)
}

/// Serialize `value` as pretty JSON and write it atomically.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("serializing report: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Write a CSV table (comma-separated, header row) atomically.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

/// CSV rows for a verification report (columns: suite, residual, tolerance,
/// pass).
pub fn verify_csv_rows(report: &VerifyReport) -> Vec<Vec<String>> {
    report
        .suites
        .iter()
        .map(|s| {
            vec![
                s.name.clone(),
                format_f64(s.residual),
                format_f64(s.tolerance),
                s.pass.to_string(),
            ]
        })
        .collect()
}

/// CSV rows for operator reports (columns: operator, p_or_weak, input,
/// resolution, value).
pub fn operator_csv_rows(rows: &[OperatorReport]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.operator.clone(),
                r.p_or_weak.clone(),
                r.input.clone(),
                r.resolution.to_string(),
                format_f64(r.value),
            ]
        })
        .collect()
}
