//! Matrix input formats: headerless CSV (one row per line) or a JSON object
//! `{"matrix": [[...], ...]}`.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::spectral::{ingest_matrix, SymmetricSPDMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` is JSON; anything else is treated as CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Deserialize)]
struct MatrixDocument {
    matrix: Vec<Vec<f64>>,
}

pub fn parse_matrix(text: &str, format: Format) -> Result<Vec<Vec<f64>>> {
    match format {
        Format::Json => serde_json::from_str::<MatrixDocument>(text)
            .map(|doc| doc.matrix)
            .map_err(|e| Error::Parse(e.to_string())),
        Format::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let mut rows = Vec::new();
            for (line, record) in reader.records().enumerate() {
                let record = record.map_err(|e| Error::Parse(e.to_string()))?;
                let row = record
                    .iter()
                    .map(|field| {
                        field
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("row {}: cannot parse {field:?}", line + 1)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
            Ok(rows)
        }
    }
}

/// Read and ingest a matrix file. The format comes from the extension unless
/// `format` is given.
pub fn read_matrix(path: &Path, format: Option<Format>) -> Result<SymmetricSPDMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let rows = parse_matrix(&text, format.unwrap_or_else(|| Format::from_path(path)))?;
    ingest_matrix(&rows)
}
