//! The three expansion operators and the meta-prompts behind them.

use log::{debug, warn};
use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fitness::run_prompt;
use super::OptimizerError;
use crate::corpus::SamplePair;
use crate::llm::{Client, LlmError};
use crate::metrics::word_levenshtein;
use crate::prompt::{cleanup_instruction, collapse_newlines, Instruction, Prompt};

const OPEN_TAG: &str = "<new_instruction>";
const CLOSE_TAG: &str = "</new_instruction>";

/// One training example shown to the improve meta-prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImproveExample {
    pub pair_id: String,
    pub input: String,
    pub output: String,
    pub gold: String,
    pub error: usize,
}

pub fn improve_meta_prompt(task_name: &str, instructions: &[Instruction], examples: &[ImproveExample]) -> String {
    let mut text = format!(
        "You are a super-talented prompt engineer. You are working on improvement of the {task_name} System\n\nThe System has these Instructions:\n"
    );
    for instruction in instructions {
        text.push_str(&format!("* {instruction}\n"));
    }
    text.push_str("\nBelow are the examples of System's work:\n");
    for (n, ex) in examples.iter().enumerate() {
        let k = n + 1;
        text.push_str(&format!(
            "Input {k}: {}\nSystem's Output {k}: {}\nGold Output {k}: {}\nError {k} between System's Output {k} and Gold Output {k} for given Input {k}: {} different words.\n\n",
            ex.input, ex.output, ex.gold, ex.error
        ));
    }
    let mean = if examples.is_empty() {
        0.0
    } else {
        examples.iter().map(|e| e.error as f64).sum::<f64>() / examples.len() as f64
    };
    let mean = (mean * 100.0).round() / 100.0;
    text.push_str(&format!(
        "Mean error for examples 1-{}:\n{mean} words.\n\n",
        examples.len()
    ));
    text.push_str(
        "Suggest new instruction to augment existing instructions forcing the System's Outputs to be exactly the same as Gold Outputs for the given System's Inputs. \
You need to minimize Errors between System's Outputs and Gold Outputs. \
Put new instruction between <new_instruction> and </new_instruction> tags. \
Do not use no more than two sentences. Do not mention Gold Output. \
Do not use \"newline\" symbols in your answer. \
Prioritize fixing cases which have larger error (which have more different words).",
    );
    text
}

pub fn rephrase_meta_prompt(instruction: &Instruction) -> String {
    format!(
        "Generate a variation of the following instruction while keeping the semantic meaning, updated instruction must be no more than two sentences\n\nInstruction:{instruction}\nUpdated instruction:"
    )
}

/// The instruction between the first pair of `<new_instruction>` tags, with
/// line breaks collapsed and decorations removed.
pub fn parse_new_instruction(completion: &str) -> Option<Instruction> {
    let start = completion.find(OPEN_TAG)? + OPEN_TAG.len();
    let len = completion[start..].find(CLOSE_TAG)?;
    let inner = cleanup_instruction(&collapse_newlines(&completion[start..start + len]));
    Instruction::new(inner).ok()
}

/// Picks the improve batch: runs the parent on a seeded probe of up to twice
/// `batch_size` training pairs and keeps the worst `batch_size` of them.
pub fn select_batch<R: Rng>(
    parent: &Prompt,
    train: &[SamplePair],
    batch_size: usize,
    client: &Client,
    rng: &mut R,
) -> Result<Vec<ImproveExample>, OptimizerError> {
    let probe = train.len().min(2 * batch_size);
    let picked = index::sample(rng, train.len(), probe).into_vec();
    let mut scored = Vec::with_capacity(probe);
    for i in picked {
        let pair = &train[i];
        let output = run_prompt(parent, &pair.source, client)?;
        let (gold, error) = pair
            .references
            .iter()
            .map(|r| (r, word_levenshtein(&output, r)))
            .min_by_key(|(_, d)| *d)
            .ok_or_else(|| OptimizerError::Config(format!("pair {} has no references", pair.id)))?;
        scored.push(ImproveExample {
            pair_id: pair.id.clone(),
            input: pair.source.clone(),
            output,
            gold: gold.clone(),
            error,
        });
    }
    scored.sort_by_key(|e| std::cmp::Reverse(e.error));
    scored.truncate(batch_size);
    Ok(scored)
}

/// Samples `samples` improve completions and appends each parsed instruction
/// to the parent. Unparseable samples are dropped.
pub fn improve(
    parent: &Prompt,
    task_name: &str,
    batch: &[ImproveExample],
    samples: usize,
    tag_base: u32,
    client: &Client,
) -> Result<Vec<Prompt>, OptimizerError> {
    let meta = improve_meta_prompt(task_name, &parent.instructions, batch);
    let mut children = Vec::new();
    for s in 0..samples {
        let completion = match client.explore(&meta, tag_base + s as u32) {
            Ok(c) => c,
            Err(LlmError::Backend(e)) => {
                warn!("improve sample {s} skipped: {e}");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        match parse_new_instruction(&completion) {
            Some(instruction) => {
                let mut child = parent.clone();
                child.instructions.push(instruction);
                children.push(child);
            }
            None => debug!("improve sample {s} has no usable <new_instruction> tag"),
        }
    }
    if children.is_empty() && samples > 0 {
        warn!("improve produced no children");
    }
    Ok(children)
}

/// One child per instruction position with that instruction rephrased.
/// Empty or unchanged rephrasings yield no child.
pub fn rephrase(parent: &Prompt, tag: u32, client: &Client) -> Result<Vec<(usize, Prompt)>, OptimizerError> {
    let mut children = Vec::new();
    for (i, original) in parent.instructions.iter().enumerate() {
        let completion = match client.explore(&rephrase_meta_prompt(original), tag) {
            Ok(c) => c,
            Err(LlmError::Backend(e)) => {
                warn!("rephrase of position {i} skipped: {e}");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let Ok(variant) = Instruction::new(cleanup_instruction(&collapse_newlines(&completion))) else {
            debug!("rephrase of position {i} was empty");
            continue;
        };
        if &variant == original {
            continue;
        }
        let mut child = parent.clone();
        child.instructions[i] = variant;
        children.push((i, child));
    }
    Ok(children)
}

/// Reorders `n_permute` randomly chosen instructions with a uniformly drawn
/// non-identity permutation. `None` when there are fewer than two
/// instructions.
pub fn permute<R: Rng>(parent: &Prompt, n_permute: usize, rng: &mut R) -> Option<Prompt> {
    let len = parent.instructions.len();
    let k = n_permute.min(len);
    if k < 2 {
        return None;
    }
    let mut positions = index::sample(rng, len, k).into_vec();
    positions.sort_unstable();
    let mut order: Vec<usize> = (0..k).collect();
    while order.iter().enumerate().all(|(i, &j)| i == j) {
        order.shuffle(rng);
    }
    let mut child = parent.clone();
    for (slot, &from) in order.iter().enumerate() {
        child.instructions[positions[slot]] = parent.instructions[positions[from]].clone();
    }
    Some(child)
}
