use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::analysis::unit_diagonal_transform;
use crate::error::{Error, Result};
use crate::model::{ConnectivityMatrix, Measure};

const MAGIC: &[u8; 4] = b"MVC1";
const HEADER_LEN: usize = 4 + 8 + 8;

/// Storage format for ROI signals and matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Bin,
}

impl DataFormat {
    pub fn extension(self) -> &'static str {
        match self {
            DataFormat::Csv => "csv",
            DataFormat::Bin => "bin",
        }
    }

    /// `bin` for a `.bin` extension, `csv` otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => DataFormat::Bin,
            _ => DataFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Csv,
    Bin,
    Pgm,
}

impl From<DataFormat> for MatrixFormat {
    fn from(f: DataFormat) -> Self {
        match f {
            DataFormat::Csv => MatrixFormat::Csv,
            DataFormat::Bin => MatrixFormat::Bin,
        }
    }
}

/// Parses a headerless comma-separated matrix. Blank lines are skipped.
pub fn parse_csv(text: &str, path: &Path) -> Result<Array2<f64>> {
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = values.len();
        for (col, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::format(path, format!("line {}, field {}: cannot parse '{}'", lineno + 1, col + 1, field.trim()))
            })?;
            values.push(v);
        }
        let w = values.len() - before;
        match width {
            None => width = Some(w),
            Some(expected) if expected != w => {
                return Err(Error::format(
                    path,
                    format!("line {}: {w} fields, expected {expected}", lineno + 1),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| Error::format(path, "empty file"))?;
    Array2::from_shape_vec((rows, width), values).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_csv(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

/// Shortest round-trip decimal representation, one row per line.
pub fn write_csv(path: &Path, m: ArrayView2<'_, f64>) -> Result<()> {
    let mut out = String::new();
    for row in m.rows() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn parse_bin(bytes: &[u8], path: &Path) -> Result<Array2<f64>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(path, format!("offset {}: truncated header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::format(path, "offset 0: magic mismatch, expected MVC1"));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes"));
    let t = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let count = n
        .checked_mul(t)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| Error::format(path, "offset 4: dimensions overflow"))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != count * 8 {
        return Err(Error::format(
            path,
            format!(
                "offset {HEADER_LEN}: {} payload bytes, header {n}x{t} needs {}",
                body.len(),
                count * 8
            ),
        ));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Array2::from_shape_vec((n as usize, t as usize), values).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_bin(path: &Path) -> Result<Array2<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_bin(&bytes, path)
}

pub fn write_bin(path: &Path, m: ArrayView2<'_, f64>) -> Result<()> {
    let (n, t) = m.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n * t);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(t as u64).to_le_bytes());
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: &Path, format: DataFormat) -> Result<Array2<f64>> {
    match format {
        DataFormat::Csv => read_csv(path),
        DataFormat::Bin => read_bin(path),
    }
}

/// 8-bit binary PGM of the display transform, min-max scaled to 0..=255.
pub fn write_pgm(path: &Path, c: &ConnectivityMatrix) -> Result<()> {
    let shown = unit_diagonal_transform(c).matrix;
    let v = shown.values();
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let n = c.n();
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for &x in v.iter() {
        let level = if hi > lo { ((x - lo) / (hi - lo) * 255.0).round() } else { 0.0 };
        out.push(level as u8);
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))
}

pub fn save_matrix(c: &ConnectivityMatrix, path: &Path, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Csv => write_csv(path, c.values()),
        MatrixFormat::Bin => write_bin(path, c.values()),
        MatrixFormat::Pgm => write_pgm(path, c),
    }
}

/// Reads a stored connectivity matrix and re-checks its invariants.
pub fn load_connectivity(path: &Path, format: DataFormat, measure: Measure) -> Result<ConnectivityMatrix> {
    let values = read_matrix(path, format)?;
    ConnectivityMatrix::new(values, measure, measure.diagonal_convention())
        .map_err(|e| Error::format(path, e.to_string()))
}
