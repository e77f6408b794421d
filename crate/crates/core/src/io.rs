//! Plain-text matrix fixtures.
//!
//! ```text
//! rows cols
//! a11 a12 ...
//! ...
//! ```
//!
//! Values are written with 17 significant digits so a write/read cycle is
//! exact. Vectors use the same format with one column (a single row is
//! accepted on input too).

use std::fmt::Write as _;
use std::path::Path;

use crate::{DenseMatrix, Error, Result, SignalVector};

/// Shortest-safe lossless formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_matrix(a: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn format_vector(x: &SignalVector) -> String {
    let mut out = format!("{} 1\n", x.len());
    for &v in x.as_slice() {
        let _ = writeln!(out, "{}", fmt_f64(v));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing `rows cols` header".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline,
            message: format!("bad header: {e}"),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: hline,
            message: format!("header needs two integers, got {}", dims.len()),
        });
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for (lineno, line) in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad number: {e}"),
            })?;
        if row.len() != cols {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {cols} values, got {}", row.len()),
            });
        }
        data.extend(row);
        seen_rows += 1;
    }
    if seen_rows != rows {
        return Err(Error::Parse {
            line: hline,
            message: format!("header declares {rows} rows, found {seen_rows}"),
        });
    }
    DenseMatrix::new(rows, cols, data)
}

pub fn parse_vector(text: &str) -> Result<SignalVector> {
    let m = parse_matrix(text)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(Error::Dimension(format!(
            "vector file must have one row or one column, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    SignalVector::new(m.as_slice().to_vec())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<SignalVector> {
    parse_vector(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    std::fs::write(path, format_matrix(a))?;
    Ok(())
}

pub fn write_vector(path: impl AsRef<Path>, x: &SignalVector) -> Result<()> {
    std::fs::write(path, format_vector(x))?;
    Ok(())
}
