//! Reading and writing frames as CSV (header row, `NA` for missing) or as
//! wire-format JSON.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::frame::{CellValue, Column, ColumnName, CubeFrame, FrameError};
use crate::wire::{WireError, WireFrame};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("CSV has no header row")]
    MissingHeader,
    #[error("row {row}, column {column}: not a number")]
    NotANumber { row: usize, column: String },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Wire(#[from] WireError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guesses from the file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

pub fn parse_csv(text: &str) -> Result<CubeFrame, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(IoError::MissingHeader);
    }
    let names = headers
        .iter()
        .map(|h| ColumnName::derived(h))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cells: Vec<Vec<CellValue>> = vec![Vec::new(); names.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != names.len() {
            return Err(FrameError::RaggedRows {
                row,
                expected: names.len(),
                found: record.len(),
            }
            .into());
        }
        for (j, field) in record.iter().enumerate() {
            let v = CellValue::parse(field).ok_or_else(|| IoError::NotANumber {
                row,
                column: names[j].to_string(),
            })?;
            cells[j].push(v);
        }
    }
    let nrows = cells.first().map_or(0, Vec::len);
    let columns = names
        .into_iter()
        .zip(cells)
        .map(|(name, cells)| Column { name, cells })
        .collect();
    Ok(CubeFrame::from_columns(columns, nrows)?)
}

/// Writes the cells with a header row. Grouping and the summary flag are not
/// part of CSV.
pub fn write_csv(frame: &CubeFrame) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| {
        w.write_record(&rec).expect("writing to memory cannot fail");
    };
    write(&mut writer, frame.column_names().map(|n| n.to_string()).collect());
    for r in 0..frame.nrows() {
        write(&mut writer, frame.row(r).iter().map(|v| v.to_string()).collect());
    }
    let bytes = writer.into_inner().expect("flush to memory");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

pub fn parse_json(text: &str) -> Result<CubeFrame, IoError> {
    let wire: WireFrame = serde_json::from_str(text)?;
    Ok(wire.to_frame()?)
}

pub fn write_json(frame: &CubeFrame) -> String {
    let mut s = serde_json::to_string_pretty(&WireFrame::from_frame(frame)).expect("frames serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_csv(path: &Path) -> Result<CubeFrame, IoError> {
    parse_csv(&read(path)?)
}

pub fn save_csv(frame: &CubeFrame, path: &Path) -> Result<(), IoError> {
    write(path, &write_csv(frame))
}

pub fn load_json(path: &Path) -> Result<CubeFrame, IoError> {
    parse_json(&read(path)?)
}

pub fn save_json(frame: &CubeFrame, path: &Path) -> Result<(), IoError> {
    write(path, &write_json(frame))
}

/// Loads by extension.
pub fn load(path: &Path) -> Result<CubeFrame, IoError> {
    match Format::from_path(path) {
        Format::Csv => load_csv(path),
        Format::Json => load_json(path),
    }
}

pub fn save(frame: &CubeFrame, path: &Path, format: Format) -> Result<(), IoError> {
    match format {
        Format::Csv => save_csv(frame, path),
        Format::Json => save_json(frame, path),
    }
}

pub fn render(frame: &CubeFrame, format: Format) -> String {
    match format {
        Format::Csv => write_csv(frame),
        Format::Json => write_json(frame),
    }
}
