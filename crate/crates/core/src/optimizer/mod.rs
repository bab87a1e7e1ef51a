//! Beam search over instruction lists. Each epoch expands every pool member
//! with Improve, Rephrase and Permute children, scores the new prompts on a
//! fixed dev subsample and keeps the best `beam_b`.

pub mod fitness;
pub mod operators;

use std::collections::HashSet;

use log::{info, warn};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SamplePair;
use crate::llm::{Client, LlmError};
use crate::metrics::MetricError;
use crate::prompt::{Prompt, PromptError, TaskTemplate};
use crate::seed::derived_rng;

pub use fitness::Score;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid optimizer setup: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub n_epochs: usize,
    pub beam_b: usize,
    pub n_permute: usize,
    pub lambda: f64,
    pub improve_samples: usize,
    pub improve_batch: usize,
    /// Dev items used for scoring; `None` uses the whole dev split.
    pub dev_subsample: Option<usize>,
    #[serde(skip)]
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_epochs: 15,
            beam_b: 32,
            n_permute: 2,
            lambda: 0.05,
            improve_samples: 4,
            improve_batch: 2,
            dev_subsample: Some(50),
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.beam_b == 0 {
            return Err(OptimizerError::Config("beam_b must be at least 1".into()));
        }
        if self.n_permute == 1 {
            return Err(OptimizerError::Config("n_permute must be 0 (disabled) or at least 2".into()));
        }
        if self.improve_batch == 0 {
            return Err(OptimizerError::Config("improve_batch must be at least 1".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(OptimizerError::Config("lambda must be non-negative".into()));
        }
        if self.dev_subsample == Some(0) {
            return Err(OptimizerError::Config("dev_subsample must be positive".into()));
        }
        Ok(())
    }
}

/// Sorted indices of the dev items used for scoring during the whole run.
pub fn dev_subsample(dev_len: usize, size: Option<usize>, seed: u64) -> Vec<usize> {
    match size {
        Some(n) if n < dev_len => {
            let mut picked = index::sample(&mut derived_rng(seed, &["dev-subsample"]), dev_len, n).into_vec();
            picked.sort_unstable();
            picked
        }
        _ => (0..dev_len).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Init,
    Improve,
    Rephrase,
    Permute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: u64,
    pub prompt: Prompt,
    pub fitness: f64,
    pub raw_error: f64,
    pub drift_penalty: f64,
    pub parent_id: Option<u64>,
    pub operator: Operator,
    pub epoch: usize,
}

/// Ranked candidates: fitness descending, then older id first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    pub capacity: usize,
    pub members: Vec<Candidate>,
}

impl Pool {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            members: Vec::new(),
        }
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.members.first()
    }

    /// Adds candidates, drops any whose rendered prompt is already present,
    /// re-ranks and truncates to capacity.
    pub fn merge(&mut self, candidates: Vec<Candidate>) {
        let mut seen: HashSet<String> = self.members.iter().map(rendered).collect();
        for c in candidates {
            if seen.insert(rendered(&c)) {
                self.members.push(c);
            }
        }
        self.members.sort_by(|a, b| b.fitness.total_cmp(&a.fitness).then(a.id.cmp(&b.id)));
        self.members.truncate(self.capacity);
    }
}

fn rendered(c: &Candidate) -> String {
    c.prompt.render_template().unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub operator: Operator,
    pub n_instructions: usize,
    pub raw_error: Option<f64>,
    pub drift_penalty: Option<f64>,
    pub fitness: Option<f64>,
    /// Set when scoring failed; the candidate was excluded.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub candidates: Vec<CandidateRecord>,
    /// Proposals dropped because their prompt was already in the pool or
    /// proposed earlier in the epoch.
    pub duplicates: usize,
    pub pool: Vec<u64>,
    pub best_id: u64,
    pub best_fitness: f64,
    /// Model requests made during the epoch, cached ones included.
    pub requests: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    /// Completed epochs.
    pub epoch: usize,
    pub next_id: u64,
    pub pool: Pool,
    pub history: Vec<EpochRecord>,
}

impl OptimizerState {
    pub fn best(&self) -> &Candidate {
        self.pool.best().expect("pool is never empty")
    }
}

struct Proposal {
    prompt: Prompt,
    parent: usize,
    operator: Operator,
}

pub struct Optimizer<'a> {
    pub cfg: &'a OptimizerConfig,
    pub template: &'a TaskTemplate,
    pub train: &'a [SamplePair],
    /// The scoring subsample, fixed for the run.
    pub dev: &'a [SamplePair],
    pub client: &'a Client,
}

impl<'a> Optimizer<'a> {
    pub fn new(
        cfg: &'a OptimizerConfig,
        template: &'a TaskTemplate,
        train: &'a [SamplePair],
        dev: &'a [SamplePair],
        client: &'a Client,
    ) -> Result<Self, OptimizerError> {
        cfg.validate()?;
        if dev.is_empty() {
            return Err(OptimizerError::Config("dev set is empty".into()));
        }
        Ok(Self {
            cfg,
            template,
            train,
            dev,
            client,
        })
    }

    /// Scores the seed prompt and builds the one-member initial pool.
    pub fn init(&self, seed_prompt: &Prompt) -> Result<OptimizerState, OptimizerError> {
        seed_prompt.render_template()?;
        let score = fitness::fitness(seed_prompt, None, self.dev, self.client, self.cfg.lambda)?;
        let mut pool = Pool::new(self.cfg.beam_b);
        pool.merge(vec![Candidate {
            id: 0,
            prompt: seed_prompt.clone(),
            fitness: score.fitness,
            raw_error: score.raw_error,
            drift_penalty: score.drift_penalty,
            parent_id: None,
            operator: Operator::Init,
            epoch: 0,
        }]);
        Ok(OptimizerState {
            epoch: 0,
            next_id: 1,
            pool,
            history: Vec::new(),
        })
    }

    pub fn optimize(&self, seed_prompt: &Prompt) -> Result<OptimizerState, OptimizerError> {
        let mut state = self.init(seed_prompt)?;
        while state.epoch < self.cfg.n_epochs {
            self.run_epoch(&mut state)?;
        }
        Ok(state)
    }

    fn propose(&self, parent: &Candidate, epoch: usize) -> Result<Vec<(Prompt, Operator)>, OptimizerError> {
        let labels = ["epoch", &epoch.to_string(), "parent", &parent.id.to_string()];
        let mut rng = derived_rng(self.cfg.seed, &labels);
        let mut out = Vec::new();
        if self.cfg.improve_samples > 0 && !self.train.is_empty() {
            let batch = operators::select_batch(
                &parent.prompt,
                self.train,
                self.cfg.improve_batch,
                self.client,
                &mut rng,
            )?;
            let tag_base = (epoch * self.cfg.improve_samples) as u32;
            for child in operators::improve(
                &parent.prompt,
                &self.template.task_name,
                &batch,
                self.cfg.improve_samples,
                tag_base,
                self.client,
            )? {
                out.push((child, Operator::Improve));
            }
        }
        for (_, child) in operators::rephrase(&parent.prompt, epoch as u32, self.client)? {
            out.push((child, Operator::Rephrase));
        }
        if self.cfg.n_permute >= 2 {
            if let Some(child) = operators::permute(&parent.prompt, self.cfg.n_permute, &mut rng) {
                out.push((child, Operator::Permute));
            }
        }
        Ok(out)
    }

    /// One expand-score-truncate round. A failing model call while
    /// generating children aborts the epoch and leaves `state` untouched;
    /// a failure while scoring only excludes that candidate.
    pub fn run_epoch(&self, state: &mut OptimizerState) -> Result<(), OptimizerError> {
        let epoch = state.epoch + 1;
        let requests_before = self.client.gateway().request_count();
        let parents = state.pool.members.clone();

        let expanded: Vec<Vec<(Prompt, Operator)>> = if self.client.parallel_safe() {
            parents.par_iter().map(|p| self.propose(p, epoch)).collect::<Result<_, _>>()?
        } else {
            parents.iter().map(|p| self.propose(p, epoch)).collect::<Result<_, _>>()?
        };

        let mut seen: HashSet<String> = parents.iter().map(rendered).collect();
        let mut proposals = Vec::new();
        let mut duplicates = 0;
        for (parent, children) in expanded.into_iter().enumerate() {
            for (prompt, operator) in children {
                if seen.insert(prompt.render_template()?) {
                    proposals.push(Proposal {
                        prompt,
                        parent,
                        operator,
                    });
                } else {
                    duplicates += 1;
                }
            }
        }

        let score = |p: &Proposal| {
            fitness::fitness(
                &p.prompt,
                Some(&parents[p.parent].prompt),
                self.dev,
                self.client,
                self.cfg.lambda,
            )
        };
        let scores: Vec<Result<Score, OptimizerError>> = if self.client.parallel_safe() {
            proposals.par_iter().map(score).collect()
        } else {
            proposals.iter().map(score).collect()
        };

        let mut records = Vec::with_capacity(proposals.len());
        let mut scored = Vec::new();
        for (proposal, result) in proposals.into_iter().zip(scores) {
            let id = state.next_id;
            state.next_id += 1;
            let parent_id = parents[proposal.parent].id;
            let mut record = CandidateRecord {
                id,
                parent_id: Some(parent_id),
                operator: proposal.operator,
                n_instructions: proposal.prompt.instructions.len(),
                raw_error: None,
                drift_penalty: None,
                fitness: None,
                error: None,
            };
            match result {
                Ok(s) => {
                    record.raw_error = Some(s.raw_error);
                    record.drift_penalty = Some(s.drift_penalty);
                    record.fitness = Some(s.fitness);
                    scored.push(Candidate {
                        id,
                        prompt: proposal.prompt,
                        fitness: s.fitness,
                        raw_error: s.raw_error,
                        drift_penalty: s.drift_penalty,
                        parent_id: Some(parent_id),
                        operator: proposal.operator,
                        epoch,
                    });
                }
                Err(e) => {
                    warn!("candidate {id} excluded: {e}");
                    record.error = Some(e.to_string());
                }
            }
            records.push(record);
        }

        if scored.is_empty() {
            warn!("epoch {epoch}: no candidate was scored; pool unchanged");
        }
        state.pool.merge(scored);
        let best = state.best();
        info!(
            "epoch {epoch}: {} new, best #{} fitness {:.4} raw error {:.4}",
            records.len(),
            best.id,
            best.fitness,
            best.raw_error
        );
        state.history.push(EpochRecord {
            epoch,
            duplicates,
            pool: state.pool.members.iter().map(|c| c.id).collect(),
            best_id: best.id,
            best_fitness: best.fitness,
            candidates: records,
            requests: self.client.gateway().request_count() - requests_before,
        });
        state.epoch = epoch;
        Ok(())
    }
}
