//! Plain-text sample parsing: values separated by commas, whitespace or newlines.

use thiserror::Error;

use crate::estimate::Sample;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("no values found")]
    Empty,
    #[error("line {line}, column {column}: cannot parse {token:?} as a number")]
    Parse { line: usize, column: usize, token: String },
    #[error("line {line}, column {column}: value {value} is not positive")]
    NonPositive { line: usize, column: usize, value: f64 },
    #[error("line {line}, column {column}: value {token:?} is not finite")]
    NonFinite { line: usize, column: usize, token: String },
}

pub fn parse_sample(text: &str) -> Result<Sample, IngestError> {
    let mut values = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut offset = 0;
        for token in line.split(|c: char| c == ',' || c.is_whitespace()) {
            let column = offset + 1;
            offset += token.len() + 1;
            if token.is_empty() {
                continue;
            }
            let value: f64 = token.parse().map_err(|_| IngestError::Parse {
                line: ln + 1,
                column,
                token: token.to_string(),
            })?;
            if !value.is_finite() {
                return Err(IngestError::NonFinite { line: ln + 1, column, token: token.to_string() });
            }
            if value <= 0.0 {
                return Err(IngestError::NonPositive { line: ln + 1, column, value });
            }
            values.push(value);
        }
    }
    if values.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(Sample::new(values).expect("values validated above"))
}

pub fn read_sample(path: &std::path::Path) -> Result<Sample, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_sample(&text)
}
