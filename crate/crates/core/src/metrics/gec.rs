//! Edit-overlap F0.5 for grammatical error correction.
//!
//! Hypothesis edits come from a token-level Levenshtein alignment of source
//! to hypothesis, with adjacent non-matching operations merged into one
//! maximal edit. An edit counts as a true positive when its span and
//! correction both equal a gold edit; error types are ignored. This is an
//! approximation of ERRANT and is reported under the name `f05-approx`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::levenshtein::{align, AlignOp};
use super::MetricError;
use crate::corpus::M2Record;

pub const BETA: f64 = 0.5;

/// A token-span edit: replace `[start, end)` of the source with `correction`
/// (tokens joined by single spaces).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpanEdit {
    pub start: usize,
    pub end: usize,
    pub correction: String,
}

impl SpanEdit {
    pub fn new(start: usize, end: usize, correction: impl Into<String>) -> Self {
        Self {
            start,
            end,
            correction: correction.into(),
        }
    }
}

pub type EditSet = BTreeSet<SpanEdit>;

pub fn extract_edits(source: &str, hypothesis: &str) -> EditSet {
    let src: Vec<&str> = source.split_whitespace().collect();
    let hyp: Vec<&str> = hypothesis.split_whitespace().collect();
    let mut edits = EditSet::new();

    let mut i = 0;
    let mut j = 0;
    let mut open: Option<(usize, Vec<&str>)> = None;
    for op in align(&src, &hyp) {
        match op {
            AlignOp::Match => {
                if let Some((start, tokens)) = open.take() {
                    edits.insert(SpanEdit::new(start, i, tokens.join(" ")));
                }
                i += 1;
                j += 1;
            }
            AlignOp::Substitute | AlignOp::Delete | AlignOp::Insert => {
                let (_, tokens) = open.get_or_insert_with(|| (i, Vec::new()));
                if op != AlignOp::Delete {
                    tokens.push(hyp[j]);
                    j += 1;
                }
                if op != AlignOp::Insert {
                    i += 1;
                }
            }
        }
    }
    if let Some((start, tokens)) = open {
        edits.insert(SpanEdit::new(start, i, tokens.join(" ")));
    }
    edits
}

/// Applies non-overlapping edits to a whitespace-tokenized source.
pub fn apply_span_edits(source: &str, edits: &EditSet) -> String {
    let mut tokens: Vec<&str> = source.split_whitespace().collect();
    for e in edits.iter().rev() {
        tokens.splice(e.start..e.end, e.correction.split_whitespace());
    }
    tokens.join(" ")
}

/// True/false positive and false negative edit counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl EditCounts {
    pub fn add(self, other: EditCounts) -> EditCounts {
        EditCounts {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
        }
    }

    /// Precision is 1 when nothing was proposed and recall is 1 when nothing
    /// was expected, following ERRANT; F is 0 when both are 0.
    pub fn f_beta(&self, beta: f64) -> f64 {
        let p = if self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        };
        let r = if self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        };
        let b2 = beta * beta;
        if p + r == 0.0 {
            0.0
        } else {
            (1.0 + b2) * p * r / (b2 * p + r)
        }
    }
}

/// Gold edits of one annotator in comparable form. Noop markers, `UNK`
/// detections and edits that leave the span unchanged carry no correction.
fn gold_edit_set(record: &M2Record, annotator: u32) -> EditSet {
    let Some(annotation) = record.annotators.get(&annotator) else {
        return EditSet::new();
    };
    annotation
        .edits()
        .iter()
        .filter(|e| e.type_label != "UNK")
        .filter_map(|e| {
            let correction = e.correction.split_whitespace().collect::<Vec<_>>().join(" ");
            let original = record.source_tokens[e.start..e.end].join(" ");
            (correction != original).then(|| SpanEdit::new(e.start, e.end, correction))
        })
        .collect()
}

fn counts(hyp: &EditSet, gold: &EditSet) -> EditCounts {
    let tp = hyp.intersection(gold).count();
    EditCounts {
        tp,
        fp: hyp.len() - tp,
        fn_: gold.len() - tp,
    }
}

/// Counts for one sentence against the annotator that maximizes sentence
/// F0.5; ties prefer more TP, then fewer FP, then fewer FN, then the lowest id.
pub fn sentence_counts(record: &M2Record, hypothesis: &str) -> EditCounts {
    let hyp = extract_edits(&record.source_text(), hypothesis);
    if record.annotators.is_empty() {
        return counts(&hyp, &EditSet::new());
    }
    let mut best: Option<(EditCounts, f64)> = None;
    for &annotator in record.annotators.keys() {
        let c = counts(&hyp, &gold_edit_set(record, annotator));
        let f = c.f_beta(BETA);
        let better = match &best {
            None => true,
            Some((b, bf)) => {
                f > *bf
                    || (f == *bf && c.tp > b.tp)
                    || (f == *bf && c.tp == b.tp && c.fp < b.fp)
                    || (f == *bf && c.tp == b.tp && c.fp == b.fp && c.fn_ < b.fn_)
            }
        };
        if better {
            best = Some((c, f));
        }
    }
    best.map(|(c, _)| c).unwrap_or_default()
}

/// Per-sentence counts and the corpus-level F0.5 over their sum.
pub fn f05_counts(
    records: &[M2Record],
    hypotheses: &[String],
) -> Result<(Vec<EditCounts>, f64), MetricError> {
    if records.len() != hypotheses.len() {
        return Err(MetricError::LengthMismatch {
            expected: records.len(),
            found: hypotheses.len(),
        });
    }
    let per: Vec<EditCounts> = records
        .iter()
        .zip(hypotheses)
        .map(|(r, h)| sentence_counts(r, h))
        .collect();
    let total = per.iter().fold(EditCounts::default(), |acc, c| acc.add(*c));
    Ok((per, total.f_beta(BETA)))
}

pub fn f05(records: &[M2Record], hypotheses: &[String]) -> Result<f64, MetricError> {
    f05_counts(records, hypotheses).map(|(_, f)| f)
}
