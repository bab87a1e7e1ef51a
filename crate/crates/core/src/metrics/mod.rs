//! Scoring: word-level Levenshtein (the optimization signal), SARI and an
//! edit-overlap F0.5 over M2 gold edits.

mod gec;
mod levenshtein;
mod sari;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gec::{
    apply_span_edits, extract_edits, f05, f05_counts, sentence_counts, EditCounts, EditSet,
    SpanEdit, BETA,
};
pub use levenshtein::{levenshtein, word_levenshtein};
pub use sari::{sari, sari_components, SariComponents};

use crate::corpus::{M2Record, SamplePair};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("reference list is empty")]
    EmptyReferences,
    #[error("length mismatch: expected {expected} items, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

pub const LEVENSHTEIN: &str = "word-levenshtein";
pub const SARI: &str = "sari";
pub const F05_APPROX: &str = "f05-approx";

/// Distance to the closest reference.
pub fn min_ref_levenshtein(output: &str, references: &[String]) -> Result<usize, MetricError> {
    references
        .iter()
        .map(|r| word_levenshtein(output, r))
        .min()
        .ok_or(MetricError::EmptyReferences)
}

/// Score of one sample: a plain value, or edit counts for F0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleScore {
    Value(f64),
    Counts(EditCounts),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(rename = "metric")]
    pub metric_name: String,
    pub aggregate: f64,
    #[serde(rename = "n")]
    pub n_samples: usize,
    pub per_sample: Vec<SampleScore>,
}

impl MetricReport {
    fn mean_of(metric: &str, values: Vec<f64>) -> Self {
        let aggregate = if values.is_empty() {
            0.0
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        MetricReport {
            metric_name: metric.to_string(),
            aggregate,
            n_samples: values.len(),
            per_sample: values.into_iter().map(SampleScore::Value).collect(),
        }
    }

    /// Mean distance of each output to its closest reference.
    pub fn levenshtein(pairs: &[SamplePair], outputs: &[String]) -> Result<Self, MetricError> {
        check_len(pairs.len(), outputs.len())?;
        let values = pairs
            .iter()
            .zip(outputs)
            .map(|(p, o)| min_ref_levenshtein(o, &p.references).map(|d| d as f64))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::mean_of(LEVENSHTEIN, values))
    }

    pub fn sari(pairs: &[SamplePair], outputs: &[String]) -> Result<Self, MetricError> {
        check_len(pairs.len(), outputs.len())?;
        let values = pairs
            .iter()
            .zip(outputs)
            .map(|(p, o)| sari(&p.source, o, &p.references))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::mean_of(SARI, values))
    }

    pub fn f05(records: &[M2Record], hypotheses: &[String]) -> Result<Self, MetricError> {
        let (per, aggregate) = f05_counts(records, hypotheses)?;
        Ok(MetricReport {
            metric_name: F05_APPROX.to_string(),
            aggregate,
            n_samples: per.len(),
            per_sample: per.into_iter().map(SampleScore::Counts).collect(),
        })
    }

    pub fn write_json(reports: &[MetricReport], path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(reports).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), MetricError> {
    if expected == found {
        Ok(())
    } else {
        Err(MetricError::LengthMismatch { expected, found })
    }
}
