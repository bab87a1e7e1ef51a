use std::fs;
use std::path::{Path, PathBuf};

use super::{split_lines, CorpusError, SamplePair};

fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    let lines: Vec<String> = split_lines(&text)
        .into_iter()
        .map(|l| l.trim().to_string())
        .collect();
    if lines.is_empty() {
        return Err(CorpusError::Format {
            path: path.to_path_buf(),
            message: "empty file".into(),
        });
    }
    Ok(lines)
}

/// Loads a source file and N line-aligned reference files. Pair `i` holds
/// line `i` of the source and line `i` of every reference file, in the order
/// the reference paths are given.
pub fn load_asset<P: AsRef<Path>>(
    source_path: impl AsRef<Path>,
    reference_paths: &[P],
) -> Result<Vec<SamplePair>, CorpusError> {
    let source_path = source_path.as_ref();
    if reference_paths.is_empty() {
        return Err(CorpusError::Format {
            path: source_path.to_path_buf(),
            message: "at least one reference file is required".into(),
        });
    }
    let sources = read_lines(source_path)?;
    let mut references: Vec<(PathBuf, Vec<String>)> = Vec::with_capacity(reference_paths.len());
    for path in reference_paths {
        let path = path.as_ref();
        let lines = read_lines(path)?;
        if lines.len() != sources.len() {
            return Err(CorpusError::Format {
                path: path.to_path_buf(),
                message: format!(
                    "line-count mismatch: {} lines, source {} has {}",
                    lines.len(),
                    source_path.display(),
                    sources.len()
                ),
            });
        }
        references.push((path.to_path_buf(), lines));
    }

    Ok(sources
        .into_iter()
        .enumerate()
        .map(|(i, source)| {
            let refs = references.iter().map(|(_, lines)| lines[i].clone()).collect();
            SamplePair::new(i.to_string(), source, refs)
        })
        .collect())
}
