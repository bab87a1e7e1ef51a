//! Dataset ingestion: line-aligned multi-reference files, M2 annotations and
//! paired JSONL, plus seeded train/dev sampling.

mod asset;
mod jsonl;
mod m2;
mod split;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use asset::load_asset;
pub use jsonl::{load_jsonl, parse_jsonl};
pub use m2::{apply_edits, load_m2, parse_m2, AnnotatorEdits, M2Edit, M2Record};
pub use split::{sample_split, SplitSpec};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("annotator {annotator} not present in record")]
    UnknownAnnotator { annotator: u32 },
    #[error("overlapping edits for annotator {annotator}: [{first_start}, {first_end}) and [{second_start}, {second_end})")]
    OverlappingEdits {
        annotator: u32,
        first_start: usize,
        first_end: usize,
        second_start: usize,
        second_end: usize,
    },
    #[error("invalid split: {0}")]
    Split(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.into(),
            source,
        }
    }
}

/// One input text with its gold outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePair {
    pub id: String,
    pub source: String,
    pub references: Vec<String>,
}

impl SamplePair {
    pub fn new(id: impl Into<String>, source: impl Into<String>, references: Vec<String>) -> Self {
        Self {
            id: id.into(),
            source: source.into(),
            references,
        }
    }

    /// Reference shown when a single gold output is needed.
    pub fn first_reference(&self) -> &str {
        self.references.first().map(String::as_str).unwrap_or("")
    }
}

/// Strips a trailing `\n` or `\r\n`; every other byte is kept as-is.
pub(crate) fn trim_line_ending(line: &str) -> &str {
    let line = line.strip_suffix('\n').unwrap_or(line);
    line.strip_suffix('\r').unwrap_or(line)
}

/// Splits file contents into lines. A final trailing newline does not start
/// an extra empty line.
pub(crate) fn split_lines(text: &str) -> Vec<&str> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n').map(trim_line_ending).collect()
}
