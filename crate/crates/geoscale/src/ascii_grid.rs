//! Esri ASCII grid: a `key value` header (ncols, nrows, xllcorner,
//! yllcorner, cellsize, optional NODATA_value) followed by `nrows` rows of
//! `ncols` numbers, north first.

use std::fmt::Write;

use geoscale_core::geometry::DEFAULT_NODATA;
use geoscale_core::{GeometryError, Point, RasterGrid};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("missing header key {0}")]
    MissingKey(&'static str),
    #[error("line {line}: bad value '{token}' for {key}")]
    BadHeader { line: usize, key: String, token: String },
    #[error("line {line}: '{token}' is not a number")]
    BadNumber { line: usize, token: String },
    #[error("row {row} has {got} values, header says ncols {expected}")]
    RowLength { row: usize, expected: usize, got: usize },
    #[error("body has {got} rows, header says nrows {expected}")]
    RowCount { expected: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

const KEYS: [&str; 6] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"];

pub fn parse_ascii_grid(text: &str) -> Result<RasterGrid, GridError> {
    let mut header: [Option<f64>; 6] = [None; 6];
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    while let Some((n, line)) = lines.peek().copied() {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default().to_ascii_lowercase();
        let Some(k) = KEYS.iter().position(|&s| s == key) else { break };
        let token = parts.next().unwrap_or_default();
        let bad = || GridError::BadHeader { line: n + 1, key: key.clone(), token: token.to_string() };
        let v: f64 = token.parse().map_err(|_| bad())?;
        if k < 2 && (v < 0.0 || v.fract() != 0.0) {
            return Err(bad());
        }
        header[k] = Some(v);
        lines.next();
    }
    let need = |k: usize| header[k].ok_or(GridError::MissingKey(KEYS[k]));
    let ncols = need(0)? as usize;
    let nrows = need(1)? as usize;
    let origin = Point::new(need(2)?, need(3)?);
    let cell = need(4)?;
    let nodata = header[5].unwrap_or(DEFAULT_NODATA);

    let mut values = Vec::with_capacity(ncols * nrows);
    let mut rows = 0;
    for (n, line) in lines {
        let before = values.len();
        for token in line.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| GridError::BadNumber { line: n + 1, token: token.to_string() })?;
            values.push(v);
        }
        let got = values.len() - before;
        if got != ncols {
            return Err(GridError::RowLength { row: rows, expected: ncols, got });
        }
        rows += 1;
    }
    if rows != nrows {
        return Err(GridError::RowCount { expected: nrows, got: rows });
    }
    Ok(RasterGrid::new(ncols, nrows, origin, cell, nodata, values)?)
}

/// Writes a grid; numbers use the shortest form that reads back exactly.
pub fn write_ascii_grid(g: &RasterGrid) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "ncols {}", g.ncols);
    let _ = writeln!(s, "nrows {}", g.nrows);
    let _ = writeln!(s, "xllcorner {}", g.origin.x);
    let _ = writeln!(s, "yllcorner {}", g.origin.y);
    let _ = writeln!(s, "cellsize {}", g.cell_size);
    let _ = writeln!(s, "NODATA_value {}", g.nodata);
    for row in g.values.chunks(g.ncols) {
        let mut first = true;
        for v in row {
            if !first {
                s.push(' ');
            }
            first = false;
            let _ = write!(s, "{v}");
        }
        s.push('\n');
    }
    s
}
