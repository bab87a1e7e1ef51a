//! Synthetic tasks and scripts shared by the integration and acceptance tests.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use apio::corpus::SamplePair;
use apio::llm::{Client, Gateway, Script, ScriptEntry, ScriptedBackend};
use apio::prompt::{Instruction, Prompt, TaskKind, TaskTemplate};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GEC_FOOTER: &str = "Sentence: {input_text}\nCorrected sentence:";
pub const INDUCE_MATCH: &str = "You are the prompt engineer";
pub const IMPROVE_MATCH: &str = "super-talented prompt engineer";
pub const REPHRASE_MATCH: &str = "Generate a variation";
pub const TASK_MATCH: &str = "\nCorrected sentence:";

pub const PLANTED: &str = "Replace \"recieve\" with \"receive\".";
pub const TEH_RULE: &str = "Replace \"teh\" with \"the\".";

pub fn client(entries: Vec<ScriptEntry>) -> Client {
    let backend = ScriptedBackend::from_entries(entries).unwrap();
    Client::new(Arc::new(Gateway::new(Arc::new(backend), None)), "scripted", 256)
}

pub fn prompt(texts: &[&str]) -> Prompt {
    TaskTemplate::for_task(TaskKind::Gec)
        .prompt("", texts.iter().map(|t| Instruction::new(*t).unwrap()).collect())
        .unwrap()
}

pub fn tagged(instruction: &str) -> String {
    format!("Here is my suggestion.\n<new_instruction>{instruction}</new_instruction>")
}

/// Eight sentences that all misspell "receive"; half also misspell "the".
pub fn e2e_pairs() -> Vec<SamplePair> {
    [
        "i recieve teh mail every day",
        "did you recieve my note",
        "we recieve teh news late",
        "they recieve gifts often",
        "she will recieve teh award",
        "he did not recieve it",
        "you recieve teh best care here",
        "i hope to recieve an answer",
    ]
    .iter()
    .enumerate()
    .map(|(i, s)| {
        let gold = s.replace("recieve", "receive").replace("teh", "the");
        SamplePair::new(format!("p{i}"), *s, vec![gold])
    })
    .collect()
}

/// The scripted model for E2E-1. Induction yields the "teh" rule in trial 0
/// only; the first epoch of improve samples are distractors, after which the
/// planted rule is offered on every improve call. Task prompts are answered
/// by applying their `Replace` rules literally.
pub fn e2e_script() -> Script {
    let mut entries = vec![
        ScriptEntry::once(INDUCE_MATCH, TEH_RULE),
        ScriptEntry::once(INDUCE_MATCH, "Correct spelling mistakes."),
        ScriptEntry::once(INDUCE_MATCH, "Keep the sentence structure."),
        ScriptEntry::once(INDUCE_MATCH, "Fix the grammar."),
        ScriptEntry::once(INDUCE_MATCH, "Keep the sentence structure."),
        ScriptEntry::once(INDUCE_MATCH, "Do not add words."),
    ];
    for distractor in ["Be concise.", "Preserve capitalization.", "Keep the word order.", "Do not explain."] {
        entries.push(ScriptEntry::once(IMPROVE_MATCH, tagged(distractor)));
    }
    entries.push(ScriptEntry {
        times: None,
        ..ScriptEntry::once(IMPROVE_MATCH, tagged(PLANTED))
    });
    entries.push(ScriptEntry::always(REPHRASE_MATCH, "Fix every error in the sentence."));
    entries.push(ScriptEntry::rewrite(TASK_MATCH, GEC_FOOTER));
    Script { entries }
}

pub fn write_jsonl(path: &Path, pairs: &[SamplePair]) {
    let lines: Vec<String> = pairs
        .iter()
        .map(|p| serde_json::json!({"id": p.id, "source": p.source, "references": p.references}).to_string())
        .collect();
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

pub struct E2eFiles {
    pub data: PathBuf,
    pub script: PathBuf,
}

pub fn write_e2e(dir: &Path) -> E2eFiles {
    let data = dir.join("e2e.jsonl");
    write_jsonl(&data, &e2e_pairs());
    let script = dir.join("e2e_script.json");
    std::fs::write(&script, serde_json::to_string_pretty(&e2e_script()).unwrap()).unwrap();
    E2eFiles { data, script }
}

/// Arguments shared by the E2E-1 CLI invocations.
pub fn e2e_args(files: &E2eFiles, runs: &Path) -> Vec<String> {
    [
        "--task", "gec", "--seed", "7", "--train-size", "4", "--dev-size", "4", "--dry-run",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([
        "--data".into(),
        files.data.display().to_string(),
        "--script".into(),
        files.script.display().to_string(),
        "--runs-dir".into(),
        runs.display().to_string(),
    ])
    .collect()
}

pub fn run_cli(command: &str, args: &[String], extra: &[&str]) -> i32 {
    let mut argv = vec!["apio".to_string(), command.to_string()];
    argv.extend(args.iter().cloned());
    argv.extend(extra.iter().map(|s| s.to_string()));
    apio::runner::cli::run(argv)
}

/// Like `run_cli` without printing the command summary or error.
pub fn run_quiet(command: &str, args: &[String], extra: &[&str]) -> i32 {
    use clap::Parser;
    let mut argv = vec!["apio".to_string(), command.to_string()];
    argv.extend(args.iter().cloned());
    argv.extend(extra.iter().map(|s| s.to_string()));
    match apio::runner::cli::Cli::try_parse_from(argv) {
        Ok(cli) => match apio::runner::cli::execute(cli.command) {
            Ok(_) => 0,
            Err(e) => e.exit_code(),
        },
        Err(_) => 2,
    }
}

const WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa", "theta"];

/// A random rewrite task and a matching randomized script. Improve and
/// rephrase answers are drawn from random rules, some helpful and some
/// harmful, followed by unlimited fallbacks.
pub fn random_task(seed: u64) -> (Vec<SamplePair>, Script) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let word = |rng: &mut ChaCha8Rng| WORDS[rng.random_range(0..WORDS.len())];
    let mut pairs = Vec::new();
    for i in 0..10 {
        let len = rng.random_range(2..6);
        let source: Vec<&str> = (0..len).map(|_| word(&mut rng)).collect();
        let source = source.join(" ");
        let target = source.replace("alpha", "beta").replace("gamma", "delta");
        pairs.push(SamplePair::new(format!("r{i}"), source, vec![target]));
    }
    let rule = |rng: &mut ChaCha8Rng| format!("Replace \"{}\" with \"{}\".", word(rng), word(rng));
    let mut entries = Vec::new();
    for _ in 0..rng.random_range(5..40) {
        let text = match rng.random_range(0..4) {
            0 => "no tags at all".to_string(),
            1 => tagged("Replace \"alpha\" with \"beta\"."),
            _ => tagged(&rule(&mut rng)),
        };
        entries.push(ScriptEntry::once(IMPROVE_MATCH, text));
    }
    for _ in 0..rng.random_range(0..20) {
        entries.push(ScriptEntry::once(REPHRASE_MATCH, rule(&mut rng)));
    }
    entries.push(ScriptEntry::always(IMPROVE_MATCH, tagged("Replace \"gamma\" with \"delta\".")));
    entries.push(ScriptEntry::always(REPHRASE_MATCH, "Rewrite the text."));
    entries.push(ScriptEntry::rewrite(TASK_MATCH, GEC_FOOTER));
    (pairs, Script { entries })
}
