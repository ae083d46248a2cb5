//! Plain-text series and table files.
//!
//! * value series: one number per line, `#` comments, blank lines ignored;
//! * MAUP cells: `col,row,numerator,denominator`;
//! * MAUP zonings: `col,row,zone_id`, named after the file stem.
//!
//! Cell and zoning files may start with a header line whose first field is
//! `col`.

use std::path::Path;

use geoscale_core::maup::{CountGrid, MaupError, Zoning};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },
    #[error("no values found")]
    Empty,
    #[error("cell ({col}, {row}) is listed twice")]
    DuplicateCell { col: usize, row: usize },
    #[error("cell ({col}, {row}) is missing from a {ncols}x{nrows} grid")]
    MissingCell { col: usize, row: usize, ncols: usize, nrows: usize },
    #[error(transparent)]
    Maup(#[from] MaupError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn line_of(r: &csv::StringRecord) -> u64 {
    r.position().map(|p| p.line()).unwrap_or(0)
}

fn field<T: std::str::FromStr>(r: &csv::StringRecord, i: usize, what: &str) -> Result<T, SeriesError> {
    let raw = r.get(i).unwrap_or_default();
    raw.parse().map_err(|_| SeriesError::Line {
        line: line_of(r),
        message: format!("bad {what} '{raw}'"),
    })
}

/// Records of exactly `width` fields, skipping a leading `col,...` header.
fn records(text: &str, width: usize) -> Result<Vec<csv::StringRecord>, SeriesError> {
    let mut out = Vec::new();
    for r in reader(text).records() {
        let r = r?;
        if (r.len() == 1 && r[0].is_empty()) || r.get(0).is_some_and(|f| f.starts_with('#')) {
            continue;
        }
        if out.is_empty() && r.get(0) == Some("col") {
            continue;
        }
        if r.len() != width {
            return Err(SeriesError::Line {
                line: line_of(&r),
                message: format!("expected {width} fields, got {}", r.len()),
            });
        }
        out.push(r);
    }
    Ok(out)
}

/// One number per line.
pub fn parse_values(text: &str) -> Result<Vec<f64>, SeriesError> {
    let values: Vec<f64> = records(text, 1)?.iter().map(|r| field(r, 0, "value")).collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(SeriesError::Empty);
    }
    Ok(values)
}

/// Count grid sized by the largest column and row listed. Every cell must
/// appear exactly once.
pub fn parse_cells(text: &str) -> Result<CountGrid, SeriesError> {
    let mut cells = Vec::new();
    for r in records(text, 4)? {
        let col: usize = field(&r, 0, "col")?;
        let row: usize = field(&r, 1, "row")?;
        cells.push((col, row, field::<u64>(&r, 2, "numerator")?, field::<u64>(&r, 3, "denominator")?));
    }
    if cells.is_empty() {
        return Err(SeriesError::Empty);
    }
    let ncols = cells.iter().map(|c| c.0).max().unwrap() + 1;
    let nrows = cells.iter().map(|c| c.1).max().unwrap() + 1;
    let mut dense: Vec<Option<(u64, u64)>> = vec![None; ncols * nrows];
    for (col, row, n, d) in cells {
        let slot = &mut dense[row * ncols + col];
        if slot.is_some() {
            return Err(SeriesError::DuplicateCell { col, row });
        }
        *slot = Some((n, d));
    }
    let mut values = Vec::with_capacity(dense.len());
    for (i, v) in dense.into_iter().enumerate() {
        let (col, row) = (i % ncols, i / ncols);
        values.push(v.ok_or(SeriesError::MissingCell { col, row, ncols, nrows })?);
    }
    Ok(CountGrid::new(ncols, nrows, values)?)
}

pub fn parse_zoning(name: &str, text: &str) -> Result<Zoning, SeriesError> {
    let mut cells = Vec::new();
    for r in records(text, 3)? {
        cells.push((field(&r, 0, "col")?, field(&r, 1, "row")?, r[2].to_string()));
    }
    if cells.is_empty() {
        return Err(SeriesError::Empty);
    }
    Ok(Zoning::new(name, cells)?)
}

/// Zoning name for a file: its stem.
pub fn zoning_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// CSV text with a header row; numbers in shortest round-trip form.
pub fn write_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Two-column numeric table.
pub fn write_pairs(header: [&str; 2], rows: &[(f64, f64)]) -> String {
    write_table(&header, rows.iter().map(|(a, b)| vec![a.to_string(), b.to_string()]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_with_comments() {
        let v = parse_values("# sizes\n3\n\n1.5\n  # more\n2e3\n").unwrap();
        assert_eq!(v, vec![3.0, 1.5, 2000.0]);
    }

    #[test]
    fn bad_value_has_line() {
        let err = parse_values("1\n2\nx\n").unwrap_err();
        assert_eq!(err.to_string(), "line 3: bad value 'x'");
        assert!(matches!(parse_values("# nothing\n"), Err(SeriesError::Empty)));
    }

    #[test]
    fn cells_and_zoning() {
        let g = parse_cells("col,row,numerator,denominator\n0,0,1,10\n1,0,2,10\n0,1,3,10\n1,1,4,10\n").unwrap();
        assert_eq!((g.ncols(), g.nrows()), (2, 2));
        assert_eq!(g.cell(0, 1), (3, 10));
        let z = parse_zoning("halves", "0,0,W\n0,1,W\n1,0,E\n1,1,E\n").unwrap();
        assert_eq!(z.name, "halves");
        assert_eq!(z.zone_count(), 2);
        assert_eq!(zoning_name(Path::new("/tmp/z/halves.csv")), "halves");
    }

    #[test]
    fn missing_and_duplicate_cells() {
        assert!(matches!(parse_cells("0,0,1,2\n1,1,1,2\n"), Err(SeriesError::MissingCell { col: 1, row: 0, .. })));
        assert!(matches!(parse_cells("0,0,1,2\n0,0,1,2\n"), Err(SeriesError::DuplicateCell { .. })));
    }

    #[test]
    fn pairs_round_trip() {
        let rows = [(0.1, 1.0 / 3.0), (1e-20, 4.0)];
        let text = write_pairs(["scale", "value"], &rows);
        assert!(text.starts_with("scale,value\n0.1,0.3333333333333333\n"));
        let mut back = Vec::new();
        for r in csv::Reader::from_reader(text.as_bytes()).records() {
            let r = r.unwrap();
            back.push((r[0].parse::<f64>().unwrap(), r[1].parse::<f64>().unwrap()));
        }
        assert_eq!(back, rows);
    }
}
