//! CSV tables and atomic file writes.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Real(f64),
    Count(usize),
    Text(String),
    Missing,
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Real(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Count(v)
    }
}

impl From<Option<f64>> for Field {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Field::Missing, Field::Real)
    }
}

impl From<Option<usize>> for Field {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Field::Missing, Field::Count)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_owned())
    }
}

/// Scientific notation with 17 significant digits; round-trips every finite f64.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Real(v) => format_real(*v),
            Field::Count(n) => n.to_string(),
            Field::Text(s) => s.clone(),
            Field::Missing => String::new(),
        }
    }
}

/// RFC-4180 table: CRLF line ends, quoting only where needed.
pub fn render_csv(header: &[&str], rows: &[Vec<Field>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Export(e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(CliError::Export(format!("row has {} fields, header has {}", row.len(), header.len())));
        }
        w.write_record(row.iter().map(Field::render)).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Export(e.to_string()))
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source: std::io::Error| CliError::Io { path: path.to_owned(), source };
    if path.as_os_str().is_empty() || path.file_name().is_none() {
        return Err(io(std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty output path")));
    }
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
