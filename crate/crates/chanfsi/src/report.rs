//! CSV and JSON artifacts, and the text summary of a convergence history.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chanfsi_core::fsi::{CoupledResiduals, HistoryRow};
use serde::Serialize;
use thiserror::Error;

use crate::config::GeometrySection;

/// Columns of the convergence history, in file order.
pub const HISTORY_COLUMNS: [&str; 6] = ["n", "diff_norm", "ratio", "v_norm", "stokes_residual", "converged"];

/// Name of the coupled residual table written next to a history.
pub const RESIDUALS_FILE: &str = "residuals.csv";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io on {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("column `{column}`: {message}")]
    Schema { column: String, message: String },
}

fn io_error(path: &Path, e: impl fmt::Display) -> ReportError {
    ReportError::Io { path: path.to_owned(), message: e.to_string() }
}

/// `# geometry ...` line placed at the top of every CSV artifact.
pub fn geometry_comment(g: &GeometrySection) -> String {
    format!("# geometry lengths={:?} nx={} ny={} nz={:?} nt={}", g.lengths, g.nx, g.ny, g.nz, g.nt)
}

/// Writes `rows` as CSV after the geometry comment line.
pub fn write_csv<T: Serialize>(path: &Path, geometry: &GeometrySection, rows: &[T]) -> Result<(), ReportError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{}", geometry_comment(geometry)).map_err(|e| io_error(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryRecord {
    pub n: usize,
    pub diff_norm: f64,
    pub ratio: Option<f64>,
    pub v_norm: f64,
    pub stokes_residual: f64,
    pub converged: bool,
}

/// History rows; only the final row of a converged run carries
/// `converged = true`.
pub fn history_records(history: &[HistoryRow], converged: bool) -> Vec<HistoryRecord> {
    let last = history.len().saturating_sub(1);
    history
        .iter()
        .enumerate()
        .map(|(i, r)| HistoryRecord {
            n: r.n,
            diff_norm: r.diff_norm,
            ratio: r.ratio,
            v_norm: r.v_norm,
            stokes_residual: r.stokes_residual,
            converged: converged && i == last,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub name: String,
    pub sup: f64,
    pub l2: f64,
    pub constant: f64,
    pub h: f64,
    pub dt: f64,
}

pub fn residual_records(res: &CoupledResiduals) -> Vec<ResidualRecord> {
    res.labelled()
        .iter()
        .map(|(name, r)| ResidualRecord {
            name: (*name).to_owned(),
            sup: r.sup,
            l2: r.l2,
            constant: r.constant,
            h: res.h,
            dt: res.dt,
        })
        .collect()
}

/// Parsed history with the coupled residual table, if one sits next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySummary {
    pub rows: Vec<HistoryRecord>,
    pub residuals: Vec<ResidualRecord>,
}

impl HistorySummary {
    pub fn max_ratio(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.ratio).reduce(f64::max)
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, column: &str) -> Result<T, ReportError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.trim().parse().map_err(|_| ReportError::Schema {
        column: column.to_owned(),
        message: format!("cannot parse {raw:?}"),
    })
}

fn reader(path: &Path) -> Result<csv::Reader<File>, ReportError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file))
}

fn column_indices<const N: usize>(
    rdr: &mut csv::Reader<File>,
    columns: [&'static str; N],
) -> Result<[usize; N], ReportError> {
    let headers = rdr.headers().map_err(|e| ReportError::Schema { column: "<header>".into(), message: e.to_string() })?;
    let mut out = [0; N];
    for (slot, name) in out.iter_mut().zip(columns) {
        *slot = headers.iter().position(|h| h == name).ok_or_else(|| ReportError::Schema {
            column: name.to_owned(),
            message: "missing".into(),
        })?;
    }
    Ok(out)
}

pub fn read_history(path: &Path) -> Result<HistorySummary, ReportError> {
    let mut rdr = reader(path)?;
    let idx = column_indices(&mut rdr, HISTORY_COLUMNS)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| ReportError::Schema { column: "<row>".into(), message: e.to_string() })?;
        let raw_ratio = rec.get(idx[2]).unwrap_or("").trim();
        rows.push(HistoryRecord {
            n: field(&rec, idx[0], HISTORY_COLUMNS[0])?,
            diff_norm: field(&rec, idx[1], HISTORY_COLUMNS[1])?,
            ratio: if raw_ratio.is_empty() { None } else { Some(field(&rec, idx[2], HISTORY_COLUMNS[2])?) },
            v_norm: field(&rec, idx[3], HISTORY_COLUMNS[3])?,
            stokes_residual: field(&rec, idx[4], HISTORY_COLUMNS[4])?,
            converged: field(&rec, idx[5], HISTORY_COLUMNS[5])?,
        });
    }
    let sibling = path.with_file_name(RESIDUALS_FILE);
    let residuals = if sibling.is_file() { read_residuals(&sibling)? } else { Vec::new() };
    Ok(HistorySummary { rows, residuals })
}

fn read_residuals(path: &Path) -> Result<Vec<ResidualRecord>, ReportError> {
    const COLUMNS: [&str; 6] = ["name", "sup", "l2", "constant", "h", "dt"];
    let mut rdr = reader(path)?;
    let idx = column_indices(&mut rdr, COLUMNS)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| ReportError::Schema { column: "<row>".into(), message: e.to_string() })?;
        out.push(ResidualRecord {
            name: field(&rec, idx[0], COLUMNS[0])?,
            sup: field(&rec, idx[1], COLUMNS[1])?,
            l2: field(&rec, idx[2], COLUMNS[2])?,
            constant: field(&rec, idx[3], COLUMNS[3])?,
            h: field(&rec, idx[4], COLUMNS[4])?,
            dt: field(&rec, idx[5], COLUMNS[5])?,
        });
    }
    Ok(out)
}

impl fmt::Display for HistorySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(last) = self.rows.last() else {
            return writeln!(f, "no iterations recorded");
        };
        writeln!(f, "iterations: {}", self.rows.len())?;
        writeln!(f, "converged: {}", last.converged)?;
        writeln!(f, "final difference norm: {:.3e}", last.diff_norm)?;
        match self.max_ratio() {
            Some(r) => writeln!(f, "max contraction ratio: {r:.4}")?,
            None => writeln!(f, "max contraction ratio: n/a")?,
        }
        writeln!(f)?;
        writeln!(f, "{:>4}  {:>12}  {:>8}  {:>12}  {:>12}", "n", "diff_norm", "ratio", "v_norm", "stokes_res")?;
        for r in &self.rows {
            let ratio = r.ratio.map_or_else(|| "-".to_owned(), |x| format!("{x:.4}"));
            writeln!(
                f,
                "{:>4}  {:>12.4e}  {:>8}  {:>12.4e}  {:>12.3e}",
                r.n, r.diff_norm, ratio, r.v_norm, r.stokes_residual
            )?;
        }
        if !self.residuals.is_empty() {
            writeln!(f)?;
            writeln!(f, "{:<22}  {:>11}  {:>11}  {:>11}", "residual", "sup", "l2", "K")?;
            for r in &self.residuals {
                writeln!(f, "{:<22}  {:>11.3e}  {:>11.3e}  {:>11.3e}", r.name, r.sup, r.l2, r.constant)?;
            }
        }
        Ok(())
    }
}
