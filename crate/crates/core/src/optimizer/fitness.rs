use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OptimizerError;
use crate::corpus::SamplePair;
use crate::llm::Client;
use crate::metrics::{min_ref_levenshtein, word_levenshtein};
use crate::prompt::{clean_output, Prompt};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub fitness: f64,
    pub raw_error: f64,
    pub drift_penalty: f64,
}

/// Runs `prompt` on one input under the inference profile. Blank inputs give
/// a blank output without a model call.
pub fn run_prompt(prompt: &Prompt, input: &str, client: &Client) -> Result<String, OptimizerError> {
    if input.trim().is_empty() {
        return Ok(String::new());
    }
    let text = prompt.render(input)?;
    Ok(clean_output(&client.infer(&text)?))
}

/// Outputs for every pair, in order. Calls fan out over threads only when
/// the backend gives the same answers regardless of call order.
pub fn run_all(prompt: &Prompt, pairs: &[SamplePair], client: &Client) -> Result<Vec<String>, OptimizerError> {
    if client.parallel_safe() {
        pairs
            .par_iter()
            .map(|p| run_prompt(prompt, &p.source, client))
            .collect()
    } else {
        pairs
            .iter()
            .map(|p| run_prompt(prompt, &p.source, client))
            .collect()
    }
}

/// Mean word-level distance from each output to its closest reference.
pub fn raw_error(prompt: &Prompt, dev: &[SamplePair], client: &Client) -> Result<f64, OptimizerError> {
    if dev.is_empty() {
        return Err(OptimizerError::Config("dev set is empty".into()));
    }
    let outputs = run_all(prompt, dev, client)?;
    let mut total = 0usize;
    for (pair, output) in dev.iter().zip(&outputs) {
        total += min_ref_levenshtein(output, &pair.references)?;
    }
    Ok(total as f64 / dev.len() as f64)
}

/// Word distance between the two prompt templates, divided by the parent's
/// token count (at least 1). Zero without a parent.
pub fn drift_penalty(prompt: &Prompt, parent: Option<&Prompt>) -> Result<f64, OptimizerError> {
    let Some(parent) = parent else {
        return Ok(0.0);
    };
    let parent_text = parent.render_template()?;
    let distance = word_levenshtein(&prompt.render_template()?, &parent_text);
    let tokens = parent_text.split_whitespace().count().max(1);
    Ok(distance as f64 / tokens as f64)
}

pub fn combine(raw_error: f64, drift_penalty: f64, lambda: f64) -> f64 {
    -raw_error - lambda * drift_penalty
}

pub fn fitness(
    prompt: &Prompt,
    parent: Option<&Prompt>,
    dev: &[SamplePair],
    client: &Client,
    lambda: f64,
) -> Result<Score, OptimizerError> {
    let drift_penalty = drift_penalty(prompt, parent)?;
    let raw_error = raw_error(prompt, dev, client)?;
    Ok(Score {
        fitness: combine(raw_error, drift_penalty, lambda),
        raw_error,
        drift_penalty,
    })
}
