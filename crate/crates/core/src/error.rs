//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimension or shape disagreement between an input and what the
    /// operation expects.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A parameter outside its documented range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Malformed model file. The message names the offending field.
    #[error("model format error: {0}")]
    ModelFormat(String),

    /// Malformed IDX file, positioned at the byte where parsing failed.
    #[error("idx format error at byte {offset}: {detail}")]
    IdxFormat { offset: u64, detail: String },

    /// Malformed CSV dataset row, positioned at its line number.
    #[error("csv format error at line {line}: {detail}")]
    CsvFormat { line: usize, detail: String },

    /// An operation that requires data received none.
    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    /// A run produced an empty result population (e.g. no sample survived
    /// filtering, or an angle filter matched nothing).
    #[error("empty result: {0}")]
    EmptyResult(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
