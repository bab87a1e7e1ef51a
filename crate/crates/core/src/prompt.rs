//! Instruction-list prompts: an optional header, one `* ` bullet per
//! instruction, then a footer holding the `{input_text}` slot.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SLOT: &str = "{input_text}";
const BULLET: &str = "* ";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("footer must contain {SLOT} exactly once, found {0}")]
    Slot(usize),
    #[error("prompt has no instructions")]
    NoInstructions,
    #[error("invalid instruction: {0}")]
    Instruction(String),
    #[error("cannot parse prompt: {0}")]
    Parse(String),
}

/// One single-paragraph instruction. Never empty, never contains a newline.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Instruction(String);

impl Instruction {
    pub fn new(text: impl Into<String>) -> Result<Self, PromptError> {
        let text = text.into();
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(PromptError::Instruction("empty".into()));
        }
        if trimmed.contains(['\n', '\r']) {
            return Err(PromptError::Instruction(format!("contains a newline: {trimmed:?}")));
        }
        let instruction = Self(trimmed.to_string());
        if instruction.sentence_count() > 2 {
            log::debug!("instruction has more than two sentences: {trimmed:?}");
        }
        Ok(instruction)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Rough count of sentence-final punctuation runs.
    pub fn sentence_count(&self) -> usize {
        let mut count = 0;
        let mut in_run = false;
        for c in self.0.chars() {
            let end = matches!(c, '.' | '!' | '?');
            if end && !in_run {
                count += 1;
            }
            in_run = end;
        }
        count.max(1)
    }
}

impl TryFrom<String> for Instruction {
    type Error = PromptError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Instruction::new(value)
    }
}

impl From<Instruction> for String {
    fn from(value: Instruction) -> Self {
        value.0
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Prompt {
    pub header: String,
    pub instructions: Vec<Instruction>,
    pub footer: String,
}

impl Prompt {
    /// Header and footer lines may not start with `* ` so that [`Prompt::parse`]
    /// can invert [`Prompt::render`].
    pub fn new(
        header: impl Into<String>,
        instructions: Vec<Instruction>,
        footer: impl Into<String>,
    ) -> Result<Self, PromptError> {
        let header = header.into().trim_end().to_string();
        let footer = footer.into().trim_end().to_string();
        let slots = footer.matches(SLOT).count();
        if slots != 1 {
            return Err(PromptError::Slot(slots));
        }
        for (part, text) in [("header", &header), ("footer", &footer)] {
            if text.lines().any(|l| l.starts_with(BULLET)) {
                return Err(PromptError::Parse(format!("{part} line starts with a bullet")));
            }
        }
        Ok(Self {
            header,
            instructions,
            footer,
        })
    }

    /// The prompt sent for one input.
    pub fn render(&self, input_text: &str) -> Result<String, PromptError> {
        if self.instructions.is_empty() {
            return Err(PromptError::NoInstructions);
        }
        Ok(self.assemble(&self.footer.replacen(SLOT, input_text, 1)))
    }

    /// The prompt with the slot left in place; this is the prompt-file format.
    pub fn render_template(&self) -> Result<String, PromptError> {
        if self.instructions.is_empty() {
            return Err(PromptError::NoInstructions);
        }
        Ok(self.assemble(&self.footer))
    }

    fn assemble(&self, footer: &str) -> String {
        let mut lines: Vec<&str> = Vec::new();
        if !self.header.is_empty() {
            lines.extend(self.header.lines());
        }
        let bullets: Vec<String> = self
            .instructions
            .iter()
            .map(|i| format!("{BULLET}{i}"))
            .collect();
        lines.extend(bullets.iter().map(String::as_str));
        lines.extend(footer.lines());
        lines
            .into_iter()
            .map(str::trim_end)
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Inverts [`Prompt::render_template`]: lines before the first bullet are
    /// the header, bullet lines are instructions, the rest is the footer.
    pub fn parse(text: &str) -> Result<Self, PromptError> {
        let text = text.strip_suffix('\n').unwrap_or(text);
        let lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
        let first = lines
            .iter()
            .position(|l| l.starts_with(BULLET))
            .ok_or(PromptError::NoInstructions)?;
        let last = lines
            .iter()
            .rposition(|l| l.starts_with(BULLET))
            .expect("a bullet exists");
        let mut instructions = Vec::new();
        for (n, line) in lines[first..=last].iter().enumerate() {
            let body = line.strip_prefix(BULLET).ok_or_else(|| {
                PromptError::Parse(format!(
                    "line {} sits between bullets but is not one",
                    first + n + 1
                ))
            })?;
            instructions.push(Instruction::new(body)?);
        }
        Prompt::new(
            lines[..first].join("\n"),
            instructions,
            lines[last + 1..].join("\n"),
        )
    }

    pub fn instruction_texts(&self) -> Vec<String> {
        self.instructions.iter().map(|i| i.to_string()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Gec,
    Simplify,
    Generic,
}

impl FromStr for TaskKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gec" => Ok(TaskKind::Gec),
            "simplify" => Ok(TaskKind::Simplify),
            "generic" => Ok(TaskKind::Generic),
            other => Err(format!("unknown task {other:?}")),
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Gec => "gec",
            TaskKind::Simplify => "simplify",
            TaskKind::Generic => "generic",
        })
    }
}

/// Task wording shared by the task prompt and the meta-prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskTemplate {
    pub task_name: String,
    pub input_label: String,
    pub output_label: String,
    pub footer: String,
}

impl TaskTemplate {
    pub fn new(
        task_name: impl Into<String>,
        input_label: impl Into<String>,
        output_label: impl Into<String>,
    ) -> Self {
        let input_label = input_label.into();
        let output_label = output_label.into();
        Self {
            task_name: task_name.into(),
            footer: format!("{input_label}: {SLOT}\n{output_label}:"),
            input_label,
            output_label,
        }
    }

    pub fn for_task(task: TaskKind) -> Self {
        match task {
            TaskKind::Gec => Self::new("Grammatical Error Correction", "Sentence", "Corrected sentence"),
            TaskKind::Simplify => Self::new("Text Simplification", "Complex sentence", "Simple sentence"),
            TaskKind::Generic => Self::new("Text Rewriting", "Input", "Output"),
        }
    }

    /// An input/output pair in the footer's labelled layout.
    pub fn example(&self, input: &str, output: &str) -> String {
        format!("{}: {input}\n{}: {output}", self.input_label, self.output_label)
    }

    pub fn prompt(&self, header: &str, instructions: Vec<Instruction>) -> Result<Prompt, PromptError> {
        Prompt::new(header, instructions, self.footer.clone())
    }
}

const ECHO_PREFIXES: &[&str] = &[
    "new instruction:",
    "updated instruction:",
    "instruction:",
];
const QUOTES: &[(char, char)] = &[('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’'), ('`', '`')];

/// Strips decorations models put around a single instruction: surrounding
/// whitespace and quotes, an echoed `Instruction:` label and a leading
/// markdown bullet or list number. Applied until nothing changes.
pub fn cleanup_instruction(raw: &str) -> String {
    let mut text = raw.trim().to_string();
    loop {
        let before = text.clone();
        let lower = text.to_lowercase();
        for prefix in ECHO_PREFIXES {
            if lower.starts_with(prefix) {
                text = text[prefix.len()..].trim_start().to_string();
                break;
            }
        }
        for bullet in ["* ", "- ", "• "] {
            if let Some(rest) = text.strip_prefix(bullet) {
                text = rest.trim_start().to_string();
            }
        }
        let digits = text.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits > 0 && text[digits..].starts_with(". ") {
            text = text[digits + 2..].trim_start().to_string();
        }
        for (open, close) in QUOTES {
            if text.chars().count() >= 2 && text.starts_with(*open) && text.ends_with(*close) {
                text = text[open.len_utf8()..text.len() - close.len_utf8()].trim().to_string();
            }
        }
        text = text.trim().to_string();
        if text == before {
            return text;
        }
    }
}

/// Replaces every run of whitespace containing a line break with one space.
pub fn collapse_newlines(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending = String::new();
    for c in text.chars() {
        if c.is_whitespace() {
            pending.push(c);
            continue;
        }
        if !pending.is_empty() {
            if pending.contains(['\n', '\r']) {
                out.push(' ');
            } else {
                out.push_str(&pending);
            }
            pending.clear();
        }
        out.push(c);
    }
    out
}

/// Post-processes a task completion: trims it, keeps the text before the
/// first blank line and joins any remaining lines with spaces.
pub fn clean_output(raw: &str) -> String {
    let trimmed = raw.trim();
    let mut kept = Vec::new();
    for line in trimmed.lines() {
        if line.trim().is_empty() {
            break;
        }
        kept.push(line.trim());
    }
    kept.join(" ")
}
