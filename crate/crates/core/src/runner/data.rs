use std::path::{Path, PathBuf};

use log::warn;

use super::config::DataFormat;
use super::RunError;
use crate::corpus::{self, CorpusError, M2Record, SamplePair};

/// A loaded corpus. `m2` keeps the gold edits when the data came from an M2
/// file, aligned with `pairs`.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub pairs: Vec<SamplePair>,
    pub m2: Option<Vec<M2Record>>,
}

pub fn resolve_format(path: &Path, refs: &[PathBuf], format: Option<DataFormat>) -> DataFormat {
    if let Some(f) = format {
        return f;
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => DataFormat::Jsonl,
        Some("m2") => DataFormat::M2,
        _ if !refs.is_empty() => DataFormat::Asset,
        _ => DataFormat::Text,
    }
}

pub fn require_file(path: &Path, what: &str) -> Result<(), RunError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(RunError::Usage(format!("{what} not found: {}", path.display())))
    }
}

fn corpus_error(e: CorpusError) -> RunError {
    RunError::Usage(e.to_string())
}

/// Loads input/reference pairs. M2 records whose edits cannot be applied
/// are skipped with a warning.
pub fn load_pairs(path: &Path, refs: &[PathBuf], format: Option<DataFormat>) -> Result<Dataset, RunError> {
    require_file(path, "dataset")?;
    for r in refs {
        require_file(r, "reference file")?;
    }
    match resolve_format(path, refs, format) {
        DataFormat::Jsonl => Ok(Dataset {
            pairs: corpus::load_jsonl(path).map_err(corpus_error)?,
            m2: None,
        }),
        DataFormat::Asset => Ok(Dataset {
            pairs: corpus::load_asset(path, refs).map_err(corpus_error)?,
            m2: None,
        }),
        DataFormat::M2 => {
            let records = corpus::load_m2(path).map_err(corpus_error)?;
            let mut pairs = Vec::with_capacity(records.len());
            let mut kept = Vec::with_capacity(records.len());
            for (i, record) in records.into_iter().enumerate() {
                match record.to_sample_pair(i.to_string()) {
                    Ok(pair) => {
                        pairs.push(pair);
                        kept.push(record);
                    }
                    Err(e) => warn!("{}: record {i} skipped: {e}", path.display()),
                }
            }
            Ok(Dataset {
                pairs,
                m2: Some(kept),
            })
        }
        DataFormat::Text => Err(RunError::Usage(format!(
            "{}: plain text has no references; use --refs, --format or a .jsonl/.m2 file",
            path.display()
        ))),
    }
}

/// Input texts only, for inference and baselines.
pub fn load_sources(path: &Path, refs: &[PathBuf], format: Option<DataFormat>) -> Result<Vec<String>, RunError> {
    require_file(path, "dataset")?;
    match resolve_format(path, refs, format) {
        DataFormat::Text | DataFormat::Asset => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))?;
            Ok(read_lines(&text))
        }
        DataFormat::Jsonl => Ok(corpus::load_jsonl(path)
            .map_err(corpus_error)?
            .into_iter()
            .map(|p| p.source)
            .collect()),
        DataFormat::M2 => Ok(corpus::load_m2(path)
            .map_err(corpus_error)?
            .iter()
            .map(M2Record::source_text)
            .collect()),
    }
}

/// Lines without their line endings; a final newline does not add a line.
pub fn read_lines(text: &str) -> Vec<String> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    if text.is_empty() {
        return Vec::new();
    }
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}
