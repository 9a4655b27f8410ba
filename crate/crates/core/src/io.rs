//! File formats. Every writer goes through [`write_atomic`], so a failed run
//! never leaves a partial file behind.
//!
//! - dataset CSV: one row per coordinate `j`, `n` comma-separated values, no header;
//! - `trace_<label>.csv`: `iteration,tau,sigma2`;
//! - `report_<label>.json`: a serialized [`DiagnosticsReport`];
//! - `grid_result.csv`: `n,tau,dataset_index,te_px,te_nonpx,re`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::experiments::{GridResult, SimulatedData};
use crate::model::{Dataset, Trace};

/// Writes `contents` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut out = String::with_capacity(data.p() * data.n() * 24);
    for row in data.rows() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn parse_field(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {:?}", field.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value {v}"),
        });
    }
    Ok(v)
}

/// Blank lines and lines starting with `#` are skipped. Line numbers in
/// errors are 1-based.
pub fn parse_dataset_csv(text: &str) -> Result<Dataset> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed.split(',').map(|f| parse_field(f, line)).collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} values, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    crate::model::build_dataset(&rows)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset_csv(&fs::read_to_string(path)?)
}

/// `j,beta,lambda` for the generating parameters.
pub fn truth_to_csv(sim: &SimulatedData) -> String {
    let mut out = String::from("j,beta,lambda\n");
    for (j, (b, l)) in sim.beta_true.iter().zip(&sim.lambda_true).enumerate() {
        writeln!(out, "{},{b:e},{l:e}", j + 1).unwrap();
    }
    out
}

/// The `iteration` column is the sweep number at which each draw was kept.
pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::from("iteration,tau,sigma2\n");
    let (burn, thin) = (trace.config.burn, trace.config.thin);
    for (k, (t, s)) in trace.tau.iter().zip(&trace.sigma2).enumerate() {
        writeln!(out, "{},{t:e},{s:e}", burn + (k + 1) * thin).unwrap();
    }
    out
}

/// Reads one named column of a headed CSV file.
pub fn parse_trace_column(text: &str, column: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = names.iter().position(|h| *h == column).ok_or_else(|| Error::Parse {
        line: 1,
        message: format!("no column {column:?} in header {header:?}"),
    })?;
    lines
        .map(|(idx, raw)| {
            let fields: Vec<&str> = raw.split(',').collect();
            if fields.len() != names.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} fields, found {}", names.len(), fields.len()),
                });
            }
            parse_field(fields[col], idx + 1)
        })
        .collect()
}

pub fn read_trace_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    parse_trace_column(&fs::read_to_string(path)?, column)
}

pub fn report_to_json(report: &DiagnosticsReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn grid_to_csv(result: &GridResult) -> String {
    let mut out = String::from("n,tau,dataset_index,te_px,te_nonpx,re\n");
    for cell in &result.cells {
        for e in &cell.entries {
            writeln!(
                out,
                "{},{},{},{:e},{:e},{:e}",
                cell.n, cell.tau, e.dataset_index, e.te_px, e.te_nonpx, e.re
            )
            .unwrap();
        }
    }
    out
}

pub fn trace_path(dir: &Path, label: &str) -> PathBuf {
    dir.join(format!("trace_{label}.csv"))
}

pub fn report_path(dir: &Path, label: &str) -> PathBuf {
    dir.join(format!("report_{label}.json"))
}

/// Writes `trace_<label>.csv` and `report_<label>.json` into `dir`.
pub fn write_run(dir: &Path, label: &str, trace: &Trace, report: &DiagnosticsReport) -> Result<()> {
    let report_json = report_to_json(report)?;
    write_atomic(&trace_path(dir, label), trace_to_csv(trace).as_bytes())?;
    write_atomic(&report_path(dir, label), report_json.as_bytes())
}
