use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{Backend, ChatRequest, LlmError};

const SLOT: &str = "{input_text}";
const EXCERPT_CHARS: usize = 200;

/// How a script entry answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptResponse {
    /// Fixed completion text.
    Text(String),
    /// Treats the request as a rendered task prompt: takes the input text
    /// from the footer slot and applies every bullet instruction of the form
    /// `Replace "X" with "Y".` as a literal string replacement, in order.
    /// Other instructions are ignored.
    Rewrite { footer: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    /// Substring that must occur in the request text.
    #[serde(rename = "match")]
    pub matcher: String,
    #[serde(flatten)]
    pub response: ScriptResponse,
    /// How many requests the entry answers; `None` means unlimited.
    #[serde(default = "one")]
    pub times: Option<usize>,
}

fn one() -> Option<usize> {
    Some(1)
}

impl ScriptEntry {
    pub fn once(matcher: impl Into<String>, response: impl Into<String>) -> Self {
        Self::times(matcher, response, 1)
    }

    pub fn times(matcher: impl Into<String>, response: impl Into<String>, times: usize) -> Self {
        Self {
            matcher: matcher.into(),
            response: ScriptResponse::Text(response.into()),
            times: Some(times),
        }
    }

    pub fn always(matcher: impl Into<String>, response: impl Into<String>) -> Self {
        Self {
            matcher: matcher.into(),
            response: ScriptResponse::Text(response.into()),
            times: None,
        }
    }

    pub fn rewrite(matcher: impl Into<String>, footer: impl Into<String>) -> Self {
        Self {
            matcher: matcher.into(),
            response: ScriptResponse::Rewrite {
                footer: footer.into(),
            },
            times: None,
        }
    }
}

/// Script file: `{"entries": [{"match": ..., "text": ... | "rewrite": {"footer": ...}, "times": n | null}]}`.
/// `times` defaults to 1; `null` makes the entry answer without limit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    pub entries: Vec<ScriptEntry>,
}

impl Script {
    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Script(format!("{}: {e}", path.display())))?;
        let script: Script = serde_json::from_str(&text)
            .map_err(|e| LlmError::Script(format!("{}: {e}", path.display())))?;
        Ok(script)
    }
}

/// Offline backend answering from a script. Each request consumes the first
/// entry (in script order) whose matcher occurs in the request and which has
/// uses left.
pub struct ScriptedBackend {
    entries: Vec<ScriptEntry>,
    used: Mutex<Vec<usize>>,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> Result<Self, LlmError> {
        if script.entries.is_empty() {
            return Err(LlmError::Script("script has no entries".into()));
        }
        for entry in &script.entries {
            if let ScriptResponse::Rewrite { footer } = &entry.response {
                if footer.matches(SLOT).count() != 1 {
                    return Err(LlmError::Script(format!(
                        "rewrite footer must contain {SLOT} exactly once: {footer:?}"
                    )));
                }
            }
        }
        let used = vec![0; script.entries.len()];
        Ok(Self {
            entries: script.entries,
            used: Mutex::new(used),
        })
    }

    pub fn from_entries(entries: Vec<ScriptEntry>) -> Result<Self, LlmError> {
        Self::new(Script { entries })
    }

    /// Uses consumed per entry.
    pub fn usage(&self) -> Vec<usize> {
        self.used.lock().expect("script lock").clone()
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let text = request.text();
        let index = {
            let mut used = self.used.lock().expect("script lock");
            let found = self.entries.iter().enumerate().position(|(i, e)| {
                e.times.is_none_or(|t| used[i] < t) && text.contains(&e.matcher)
            });
            let Some(i) = found else {
                let excerpt: String = text.chars().take(EXCERPT_CHARS).collect();
                return Err(LlmError::ScriptExhausted(excerpt));
            };
            used[i] += 1;
            i
        };
        match &self.entries[index].response {
            ScriptResponse::Text(t) => Ok(t.clone()),
            ScriptResponse::Rewrite { footer } => apply_rewrite_rules(&text, footer),
        }
    }

    fn order_independent(&self) -> bool {
        false
    }

    fn snapshot(&self) -> Option<serde_json::Value> {
        Some(serde_json::json!(self.usage()))
    }

    fn restore(&self, state: &serde_json::Value) -> Result<(), LlmError> {
        let usage: Vec<usize> = serde_json::from_value(state.clone())
            .map_err(|e| LlmError::Script(format!("bad script state: {e}")))?;
        if usage.len() != self.entries.len() {
            return Err(LlmError::Script(format!(
                "script state has {} entries, script has {}",
                usage.len(),
                self.entries.len()
            )));
        }
        *self.used.lock().expect("script lock") = usage;
        Ok(())
    }
}

/// Parses `Replace "X" with "Y".` (trailing period optional).
pub(crate) fn parse_rewrite_rule(instruction: &str) -> Option<(&str, &str)> {
    let rest = instruction.trim().strip_prefix("Replace \"")?;
    let (from, rest) = rest.split_once("\" with \"")?;
    let rest = rest.strip_suffix('.').unwrap_or(rest);
    let to = rest.strip_suffix('"')?;
    (!from.is_empty()).then_some((from, to))
}

fn apply_rewrite_rules(prompt: &str, footer: &str) -> Result<String, LlmError> {
    let (before, after) = footer.split_once(SLOT).expect("validated footer");
    let body = prompt
        .strip_suffix(after)
        .ok_or_else(|| LlmError::Backend("rewrite: prompt does not end with the footer".into()))?;
    let start = body
        .rfind(before)
        .ok_or_else(|| LlmError::Backend("rewrite: footer prefix not found".into()))?;
    let mut output = body[start + before.len()..].to_string();
    for line in body[..start].lines() {
        if let Some((from, to)) = line.strip_prefix("* ").and_then(parse_rewrite_rule) {
            output = output.replace(from, to);
        }
    }
    Ok(output)
}
