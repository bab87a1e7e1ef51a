//! Prompt induction: one instruction per sampled training pair, assembled
//! into an instruction-list prompt, best of several seeded trials.

use log::{info, warn};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SamplePair;
use crate::llm::{Client, LlmError};
use crate::prompt::{cleanup_instruction, Instruction, Prompt, PromptError, TaskTemplate};
use crate::seed::{derived_rng, derived_seed};

#[derive(Debug, Error)]
pub enum InductionError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("unusable instruction for pair {pair_id}: {reason}")]
    Completion { pair_id: String, reason: String },
    #[error("invalid induction setup: {0}")]
    Config(String),
    #[error("scoring failed: {0}")]
    Fitness(String),
    #[error("all {0} induction trials failed")]
    AllTrialsFailed(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InductionConfig {
    pub n_instructions: usize,
    pub n_trials: usize,
    #[serde(skip)]
    pub seed: u64,
}

impl Default for InductionConfig {
    fn default() -> Self {
        Self {
            n_instructions: 3,
            n_trials: 10,
            seed: 0,
        }
    }
}

pub fn induction_meta_prompt(template: &TaskTemplate, pair: &SamplePair) -> String {
    format!(
        "Below is an example of an input-output pair for the {} task.\n\n{}\n\nYou are the prompt engineer. Could you give an instruction for this example?  Do not mention any part of the considered texts.",
        template.task_name,
        template.example(&pair.source, pair.first_reference())
    )
}

/// Asks for one instruction describing `pair`. A completion that is empty or
/// spans several lines after cleanup is re-sampled once with the next
/// attempt tag. Returns the instruction and the number of calls made.
pub fn induce_instruction(
    pair: &SamplePair,
    template: &TaskTemplate,
    client: &Client,
    attempt_tag: u32,
) -> Result<(Instruction, usize), InductionError> {
    let meta = induction_meta_prompt(template, pair);
    let mut reason = String::new();
    for retry in 0..2 {
        let completion = client.explore(&meta, attempt_tag + retry)?;
        let cleaned = cleanup_instruction(&completion);
        match Instruction::new(cleaned) {
            Ok(instruction) => return Ok((instruction, retry as usize + 1)),
            Err(e) => {
                warn!("pair {}: attempt {} unusable: {e}", pair.id, retry + 1);
                reason = e.to_string();
            }
        }
    }
    Err(InductionError::Completion {
        pair_id: pair.id.clone(),
        reason,
    })
}

/// A prompt induced from `n_instructions` distinct training pairs drawn with
/// `cfg.seed`, plus the ids of those pairs and the number of calls made.
pub fn induce_prompt(
    train: &[SamplePair],
    cfg: &InductionConfig,
    template: &TaskTemplate,
    client: &Client,
) -> Result<(Prompt, Vec<String>, usize), InductionError> {
    if cfg.n_instructions == 0 {
        return Err(InductionError::Config("n_instructions must be at least 1".into()));
    }
    if train.len() < cfg.n_instructions {
        return Err(InductionError::Config(format!(
            "{} instructions need at least as many training pairs, got {}",
            cfg.n_instructions,
            train.len()
        )));
    }
    let mut rng = derived_rng(cfg.seed, &["induce"]);
    let picked = index::sample(&mut rng, train.len(), cfg.n_instructions).into_vec();
    let mut instructions = Vec::with_capacity(picked.len());
    let mut ids = Vec::with_capacity(picked.len());
    let mut calls = 0;
    for (k, i) in picked.into_iter().enumerate() {
        let (instruction, n) = induce_instruction(&train[i], template, client, 2 * k as u32)?;
        instructions.push(instruction);
        ids.push(train[i].id.clone());
        calls += n;
    }
    Ok((template.prompt("", instructions)?, ids, calls))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    /// Training pairs the instructions were induced from. The first
    /// reference of each pair was shown as the output.
    pub pair_ids: Vec<String>,
    pub instructions: Vec<String>,
    pub fitness: Option<f64>,
    pub induction_calls: usize,
    pub dev_evaluated: bool,
    pub error: Option<String>,
}

fn run_trial<F>(
    trial: usize,
    train: &[SamplePair],
    cfg: &InductionConfig,
    template: &TaskTemplate,
    client: &Client,
    fitness_fn: &F,
) -> (TrialReport, Option<Prompt>)
where
    F: Fn(&Prompt) -> Result<f64, String> + Sync,
{
    let seed = derived_seed(cfg.seed, &["trial", &trial.to_string()]);
    let mut report = TrialReport {
        trial,
        seed,
        pair_ids: Vec::new(),
        instructions: Vec::new(),
        fitness: None,
        induction_calls: 0,
        dev_evaluated: false,
        error: None,
    };
    let trial_cfg = InductionConfig {
        seed,
        ..cfg.clone()
    };
    let (prompt, ids, calls) = match induce_prompt(train, &trial_cfg, template, client) {
        Ok(r) => r,
        Err(e) => {
            warn!("trial {trial} failed: {e}");
            report.error = Some(e.to_string());
            return (report, None);
        }
    };
    report.pair_ids = ids;
    report.instructions = prompt.instruction_texts();
    report.induction_calls = calls;
    report.dev_evaluated = true;
    match fitness_fn(&prompt) {
        Ok(f) => {
            report.fitness = Some(f);
            (report, Some(prompt))
        }
        Err(e) => {
            warn!("trial {trial} could not be scored: {e}");
            report.error = Some(e);
            (report, None)
        }
    }
}

/// Runs `cfg.n_trials` seeded inductions, scores each prompt with
/// `fitness_fn` (higher is better) and returns the best one. Ties go to the
/// lowest trial index. Failed trials are reported and skipped.
pub fn best_of_trials<F>(
    train: &[SamplePair],
    cfg: &InductionConfig,
    template: &TaskTemplate,
    client: &Client,
    fitness_fn: F,
) -> Result<(Prompt, Vec<TrialReport>), InductionError>
where
    F: Fn(&Prompt) -> Result<f64, String> + Sync,
{
    if cfg.n_trials == 0 {
        return Err(InductionError::Config("n_trials must be at least 1".into()));
    }
    let results: Vec<(TrialReport, Option<Prompt>)> = if client.parallel_safe() {
        (0..cfg.n_trials)
            .into_par_iter()
            .map(|t| run_trial(t, train, cfg, template, client, &fitness_fn))
            .collect()
    } else {
        (0..cfg.n_trials)
            .map(|t| run_trial(t, train, cfg, template, client, &fitness_fn))
            .collect()
    };
    let mut best: Option<(f64, Prompt)> = None;
    let mut reports = Vec::with_capacity(results.len());
    for (report, prompt) in results {
        if let (Some(f), Some(p)) = (report.fitness, prompt) {
            if best.as_ref().is_none_or(|(b, _)| f > *b) {
                best = Some((f, p));
            }
        }
        reports.push(report);
    }
    let (fitness, prompt) = best.ok_or(InductionError::AllTrialsFailed(cfg.n_trials))?;
    info!("best induced prompt has fitness {fitness:.4}");
    Ok((prompt, reports))
}
