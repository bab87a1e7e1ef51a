use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{split_lines, CorpusError, SamplePair};

#[derive(Deserialize)]
struct JsonlRow {
    #[serde(default)]
    id: Option<String>,
    source: String,
    references: Vec<String>,
}

pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Vec<SamplePair>, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_jsonl(&text, path)
}

/// One `{"id"?, "source", "references"}` object per line; blank lines are
/// skipped and missing ids default to the line index.
pub fn parse_jsonl(text: &str, path: &Path) -> Result<Vec<SamplePair>, CorpusError> {
    let mut pairs = Vec::new();
    for (idx, line) in split_lines(text).into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonlRow = serde_json::from_str(line).map_err(|e| CorpusError::Line {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        if row.references.is_empty() {
            return Err(CorpusError::Line {
                path: path.to_path_buf(),
                line: idx + 1,
                message: "references must be non-empty".into(),
            });
        }
        let id = row.id.unwrap_or_else(|| pairs.len().to_string());
        pairs.push(SamplePair::new(
            id,
            row.source.trim(),
            row.references.iter().map(|r| r.trim().to_string()).collect(),
        ));
    }
    if pairs.is_empty() {
        return Err(CorpusError::Format {
            path: path.to_path_buf(),
            message: "empty file".into(),
        });
    }
    let mut seen = std::collections::HashSet::new();
    for p in &pairs {
        if !seen.insert(p.id.as_str()) {
            return Err(CorpusError::Format {
                path: path.to_path_buf(),
                message: format!("duplicate id {:?}", p.id),
            });
        }
    }
    Ok(pairs)
}
