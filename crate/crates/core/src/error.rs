//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by any fraudbench operation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV format error at line {line}: {message}")]
    CsvFormat { line: u64, message: String },

    #[error("header mismatch: expected columns {expected:?}, found {found:?}")]
    HeaderMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("column {column:?} has zero variance; z-score is undefined")]
    ZeroVariance { column: String },

    #[error("unknown column {column:?}")]
    UnknownColumn { column: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("inconsistent row lengths: row {row} has {got} values, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("k = {k} exceeds the {available} available points")]
    KTooLarge { k: usize, available: usize },

    #[error("operation requires both classes present, found only class {only_class}")]
    SingleClass { only_class: u8 },

    #[error("class {class} has {count} rows; stratified splitting needs at least 2 per class")]
    ClassTooSmall { class: u8, count: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    #[error("gradient check requires all dropout rates to be zero")]
    DropoutActive,

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: impl Into<String>) -> Error {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
