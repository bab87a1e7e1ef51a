use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{split_lines, CorpusError, SamplePair};

const FIELD_SEP: &str = "|||";

/// A gold token-span edit from an `A` line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct M2Edit {
    pub start: usize,
    pub end: usize,
    pub type_label: String,
    /// Replacement tokens joined by single spaces; empty for a deletion.
    pub correction: String,
    pub annotator: u32,
}

/// What one annotator did to a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnnotatorEdits {
    /// `A -1 -1|||noop|||...`: the annotator judged the sentence correct.
    Noop,
    Edits(Vec<M2Edit>),
}

impl AnnotatorEdits {
    pub fn edits(&self) -> &[M2Edit] {
        match self {
            AnnotatorEdits::Noop => &[],
            AnnotatorEdits::Edits(edits) => edits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct M2Record {
    pub source_tokens: Vec<String>,
    pub annotators: BTreeMap<u32, AnnotatorEdits>,
}

impl M2Record {
    pub fn source_text(&self) -> String {
        self.source_tokens.join(" ")
    }

    /// True when at least one annotator carries a substantive edit.
    pub fn has_substantive_edits(&self) -> bool {
        self.annotators.values().any(|a| !a.edits().is_empty())
    }

    /// One corrected sentence per annotator, in annotator-id order. A record
    /// with no annotation yields the source as its only reference.
    pub fn references(&self) -> Result<Vec<String>, CorpusError> {
        if self.annotators.is_empty() {
            return Ok(vec![self.source_text()]);
        }
        self.annotators
            .keys()
            .map(|&id| apply_edits(self, id))
            .collect()
    }

    /// Serializes back to the M2 block layout (without the trailing blank line).
    pub fn to_m2(&self) -> String {
        let mut out = String::from("S");
        for tok in &self.source_tokens {
            out.push(' ');
            out.push_str(tok);
        }
        for (&annotator, edits) in &self.annotators {
            match edits {
                AnnotatorEdits::Noop => {
                    let _ = write!(
                        out,
                        "\nA -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||{annotator}"
                    );
                }
                AnnotatorEdits::Edits(edits) => {
                    for e in edits {
                        let _ = write!(
                            out,
                            "\nA {} {}|||{}|||{}|||REQUIRED|||-NONE-|||{}",
                            e.start, e.end, e.type_label, e.correction, e.annotator
                        );
                    }
                }
            }
        }
        out
    }

    /// Converts to a sample pair whose references are the per-annotator
    /// corrected sentences.
    pub fn to_sample_pair(&self, id: impl Into<String>) -> Result<SamplePair, CorpusError> {
        Ok(SamplePair::new(id, self.source_text(), self.references()?))
    }
}

pub fn load_m2(path: impl AsRef<Path>) -> Result<Vec<M2Record>, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_m2(&text, path)
}

/// Parses M2 text; `path` is only used in error messages.
pub fn parse_m2(text: &str, path: &Path) -> Result<Vec<M2Record>, CorpusError> {
    let mut records = Vec::new();
    let mut current: Option<(M2Record, usize)> = None;

    let line_err = |line: usize, message: String| CorpusError::Line {
        path: PathBuf::from(path),
        line,
        message,
    };

    for (idx, line) in split_lines(text).into_iter().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            if let Some((record, _)) = current.take() {
                records.push(record);
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('S') {
            if !(rest.is_empty() || rest.starts_with(' ')) {
                return Err(line_err(lineno, format!("unrecognized line: {line:?}")));
            }
            if let Some((record, _)) = current.take() {
                records.push(record);
            }
            let rest = rest.strip_prefix(' ').unwrap_or(rest);
            let source_tokens = if rest.is_empty() {
                Vec::new()
            } else {
                rest.split(' ').map(str::to_string).collect()
            };
            current = Some((
                M2Record {
                    source_tokens,
                    annotators: BTreeMap::new(),
                },
                lineno,
            ));
        } else if let Some(rest) = line.strip_prefix("A ") {
            let (record, _) = current
                .as_mut()
                .ok_or_else(|| line_err(lineno, "edit line before any S line".into()))?;
            let parsed = parse_edit_line(rest, record.source_tokens.len())
                .map_err(|m| line_err(lineno, m))?;
            match parsed {
                ParsedEdit::Noop { annotator } => match record.annotators.get(&annotator) {
                    Some(AnnotatorEdits::Edits(_)) => {
                        return Err(line_err(
                            lineno,
                            format!("noop mixed with edits for annotator {annotator}"),
                        ))
                    }
                    _ => {
                        record.annotators.insert(annotator, AnnotatorEdits::Noop);
                    }
                },
                ParsedEdit::Edit(edit) => {
                    let entry = record
                        .annotators
                        .entry(edit.annotator)
                        .or_insert_with(|| AnnotatorEdits::Edits(Vec::new()));
                    match entry {
                        AnnotatorEdits::Noop => {
                            return Err(line_err(
                                lineno,
                                format!("noop mixed with edits for annotator {}", edit.annotator),
                            ))
                        }
                        AnnotatorEdits::Edits(edits) => edits.push(edit),
                    }
                }
            }
        } else {
            return Err(line_err(lineno, format!("unrecognized line: {line:?}")));
        }
    }
    if let Some((record, _)) = current.take() {
        records.push(record);
    }
    Ok(records)
}

enum ParsedEdit {
    Noop { annotator: u32 },
    Edit(M2Edit),
}

fn parse_edit_line(rest: &str, n_tokens: usize) -> Result<ParsedEdit, String> {
    let fields: Vec<&str> = rest.split(FIELD_SEP).collect();
    if fields.len() != 6 {
        return Err(format!("expected 6 '|||'-separated fields, found {}", fields.len()));
    }
    let mut span = fields[0].split(' ');
    let (start, end) = match (span.next(), span.next(), span.next()) {
        (Some(s), Some(e), None) => (
            s.parse::<i64>().map_err(|_| format!("non-integer span start {s:?}"))?,
            e.parse::<i64>().map_err(|_| format!("non-integer span end {e:?}"))?,
        ),
        _ => return Err(format!("malformed span {:?}", fields[0])),
    };
    let annotator = fields[5]
        .trim()
        .parse::<u32>()
        .map_err(|_| format!("non-integer annotator {:?}", fields[5]))?;

    if start == -1 && end == -1 {
        return Ok(ParsedEdit::Noop { annotator });
    }
    if start < 0 || end < start || end as usize > n_tokens {
        return Err(format!(
            "span [{start}, {end}) out of bounds for {n_tokens} tokens"
        ));
    }
    Ok(ParsedEdit::Edit(M2Edit {
        start: start as usize,
        end: end as usize,
        type_label: fields[1].to_string(),
        correction: fields[2].to_string(),
        annotator,
    }))
}

/// Applies one annotator's edits to the source tokens, right to left by span.
/// A record without any annotation is returned unchanged.
pub fn apply_edits(record: &M2Record, annotator: u32) -> Result<String, CorpusError> {
    let edits = match record.annotators.get(&annotator) {
        Some(a) => a.edits(),
        None if record.annotators.is_empty() => &[],
        None => return Err(CorpusError::UnknownAnnotator { annotator }),
    };
    let mut sorted: Vec<&M2Edit> = edits.iter().collect();
    sorted.sort_by_key(|e| (e.start, e.end));
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        // Same start is ambiguous even for an insertion next to a replacement.
        if b.start < a.end || b.start == a.start {
            return Err(CorpusError::OverlappingEdits {
                annotator,
                first_start: a.start,
                first_end: a.end,
                second_start: b.start,
                second_end: b.end,
            });
        }
    }

    let mut tokens: Vec<String> = record.source_tokens.clone();
    for edit in sorted.iter().rev() {
        let replacement = edit
            .correction
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(str::to_string);
        tokens.splice(edit.start..edit.end, replacement);
    }
    Ok(tokens.join(" "))
}
