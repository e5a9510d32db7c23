//! Probe time series as CSV, and column-wise comparison of two series.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stepping::{Probe, StepRecord};

/// Column names in file order.
pub fn header(probes: &[Probe]) -> Vec<String> {
    let mut h = vec!["time".to_string()];
    for p in probes {
        h.push(format!("ux_{}", p.name));
        h.push(format!("uy_{}", p.name));
    }
    for p in probes {
        h.push(format!("J_{}", p.name));
        h.push(format!("W_{}", p.name));
    }
    h.push("Psi".into());
    h
}

/// CSV text; without records only the header line is produced.
pub fn format_timeseries(probes: &[Probe], records: &[StepRecord]) -> Result<String> {
    let mut s = header(probes).join(",");
    s.push('\n');
    for r in records {
        if r.displacement.len() != probes.len() {
            return Err(Error::SizeMismatch {
                expected: probes.len(),
                actual: r.displacement.len(),
            });
        }
        let mut row = vec![r.time];
        row.extend(r.displacement.iter().flatten());
        for (j, w) in r.volume_ratio.iter().zip(&r.energy) {
            row.extend([*j, *w]);
        }
        row.push(r.dissipation);
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        writeln!(s, "{}", cells.join(",")).unwrap();
    }
    Ok(s)
}

pub fn write_timeseries(path: &Path, probes: &[Probe], records: &[StepRecord]) -> Result<()> {
    let text = format_timeseries(probes, records)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parsed CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn parse_table(text: &str) -> std::result::Result<Table, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or("empty file")?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let rows = lines
        .enumerate()
        .map(|(i, l)| {
            let row: std::result::Result<Vec<f64>, String> = l
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| format!("row {}: bad number `{t}`", i + 1)))
                .collect();
            let row = row?;
            if row.len() == header.len() {
                Ok(row)
            } else {
                Err(format!("row {} has {} columns, header has {}", i + 1, row.len(), header.len()))
            }
        })
        .collect::<std::result::Result<_, _>>()?;
    Ok(Table { header, rows })
}

pub fn read_timeseries(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

/// Largest deviations in one column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDeviation {
    pub name: String,
    pub max_abs: f64,
    /// Largest absolute deviation divided by the largest magnitude in the
    /// first table's column. Columns holding only round-off in both tables
    /// (every entry below [`NOISE_FLOOR`]) report zero.
    pub max_rel: f64,
}

pub const NOISE_FLOOR: f64 = 1e-12;

/// Column-wise deviations of `b` from `a`; headers and lengths must match.
pub fn compare_tables(a: &Table, b: &Table) -> Result<Vec<ColumnDeviation>> {
    if a.header != b.header {
        return Err(Error::InvalidInput(format!(
            "incompatible headers: [{}] vs [{}]",
            a.header.join(","),
            b.header.join(",")
        )));
    }
    if a.rows.len() != b.rows.len() {
        return Err(Error::InvalidInput(format!(
            "incompatible lengths: {} vs {} rows",
            a.rows.len(),
            b.rows.len()
        )));
    }
    Ok(a.header
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let max_abs = a
                .rows
                .iter()
                .zip(&b.rows)
                .map(|(x, y)| (x[i] - y[i]).abs())
                .fold(0.0, f64::max);
            let scale = a.rows.iter().map(|r| r[i].abs()).fold(0.0, f64::max);
            let other = b.rows.iter().map(|r| r[i].abs()).fold(0.0, f64::max);
            let max_rel = if scale.max(other) < NOISE_FLOOR {
                0.0
            } else if scale > 0.0 {
                max_abs / scale
            } else {
                max_abs
            };
            ColumnDeviation {
                name: name.clone(),
                max_abs,
                max_rel,
            }
        })
        .collect())
}
