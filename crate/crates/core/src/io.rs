//! Plain numeric matrix CSV: one row per observation, comma separated, with an
//! optional non-numeric header row. Floats are written in shortest
//! round-trip form.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A parsed matrix plus the header, when the first row was not numeric.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMatrix {
    pub header: Option<Vec<String>>,
    pub data: DMatrix<f64>,
}

fn parse_field(field: &str, line: usize, column: usize) -> Result<f64> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("column {column}: '{}' is not a number", field.trim()) })?;
    if !value.is_finite() {
        return Err(Error::Parse { line, message: format!("column {column}: non-finite value") });
    }
    Ok(value)
}

/// Parses CSV text into a dense matrix. Blank lines are skipped; every data
/// row must have the same width. Line numbers in errors are 1-based.
pub fn parse_matrix_csv(text: &str) -> Result<CsvMatrix> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());

    let mut header = None;
    let mut values: Vec<f64> = Vec::new();
    let mut width = None;
    let mut rows = 0usize;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(index + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(index + 1, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rows == 0 && header.is_none() && record.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(record.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(record.len());
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(Error::Parse { line, message: format!("expected {w} columns, found {}", record.len()) })
            }
            _ => width = Some(record.len()),
        }
        for (column, field) in record.iter().enumerate() {
            values.push(parse_field(field, line, column + 1)?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse { line: 1, message: "no data rows".into() });
    }
    let cols = width.unwrap_or(0);
    Ok(CsvMatrix { header, data: DMatrix::from_row_slice(rows, cols, &values) })
}

pub fn read_matrix_csv(path: &Path) -> Result<CsvMatrix> {
    parse_matrix_csv(&std::fs::read_to_string(path)?)
}

/// Formats a matrix as CSV with an optional header.
pub fn format_matrix_csv(data: &DMatrix<f64>, header: Option<&[String]>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&h.join(","));
        out.push('\n');
    }
    for row in data.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes `contents` to a temporary sibling and renames it into place, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let file_name =
        path.file_name().ok_or_else(|| Error::InvalidArgument(format!("'{}' is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}
