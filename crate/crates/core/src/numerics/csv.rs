//! Plain CSV matrix format: one row per line, no header, `.` decimal point.

use std::io::{BufRead, Write};

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Writes entries with 17 significant digits so that `read_matrix_csv`
/// reproduces every bit.
pub fn write_matrix_csv<W: Write>(m: &Matrix, mut out: W) -> Result<()> {
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|x| format_real(*x)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_matrix_csv<R: BufRead>(input: R) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row = parse_row(trimmed, lineno + 1)?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    column: row.len().min(first.len()) + 1,
                    message: format!("ragged row: {} fields, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "no data rows".into(),
        });
    }
    Matrix::from_rows(&rows)
}

fn parse_row(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .enumerate()
        .map(|(j, cell)| {
            let cell = cell.trim();
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line: lineno,
                    column: j + 1,
                    message: format!("not a finite number: {cell:?}"),
                }),
            }
        })
        .collect()
}
