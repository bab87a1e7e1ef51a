//! Chat-completion access. Every model call in the engine goes through
//! [`Gateway::complete`], which adds caching, in-flight deduplication and a
//! call log on top of a [`Backend`].

mod cache;
mod client;
mod gateway;
mod openai;
mod scripted;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cache::{CacheEntry, ResponseCache};
pub use client::Client;
pub use gateway::{CallRecord, Gateway, GatewayStats};
pub use openai::{OpenAiBackend, OpenAiConfig, API_KEY_ENV};
pub use scripted::{Script, ScriptEntry, ScriptResponse, ScriptedBackend};

pub const DEFAULT_MAX_TOKENS: u32 = 1024;

#[derive(Debug, Error, Clone)]
pub enum LlmError {
    #[error("credential error: {0}")]
    Credential(String),
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("backend error: {0}")]
    Backend(String),
    #[error("script exhausted: no entry matches request {0:?}")]
    ScriptExhausted(String),
    #[error("invalid script: {0}")]
    Script(String),
    #[error("invalid request: {0}")]
    Request(String),
    #[error("cache error: {0}")]
    Cache(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// Sampling for prompt induction and optimization.
    Explore,
    /// Near-greedy decoding for running a prompt over data.
    Infer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationProfile {
    pub kind: ProfileKind,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub model_id: String,
}

impl GenerationProfile {
    /// temperature 1.0, top-p 1.0
    pub fn explore(model_id: impl Into<String>, max_tokens: u32) -> Self {
        Self {
            kind: ProfileKind::Explore,
            temperature: 1.0,
            top_p: 1.0,
            max_tokens,
            model_id: model_id.into(),
        }
    }

    /// temperature 0.0, top-p 0.1
    pub fn infer(model_id: impl Into<String>, max_tokens: u32) -> Self {
        Self {
            kind: ProfileKind::Infer,
            temperature: 0.0,
            top_p: 0.1,
            max_tokens,
            model_id: model_id.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<Message>,
    pub profile: GenerationProfile,
    /// Distinguishes repeated samples of the same prompt.
    pub attempt_tag: u32,
}

impl ChatRequest {
    pub fn new(
        messages: Vec<Message>,
        profile: GenerationProfile,
        attempt_tag: u32,
    ) -> Result<Self, LlmError> {
        if messages.is_empty() {
            return Err(LlmError::Request("no messages".into()));
        }
        if messages.iter().any(|m| m.content.is_empty()) {
            return Err(LlmError::Request("empty message content".into()));
        }
        Ok(Self {
            messages,
            profile,
            attempt_tag,
        })
    }

    /// A single user message.
    pub fn user(
        content: impl Into<String>,
        profile: GenerationProfile,
        attempt_tag: u32,
    ) -> Result<Self, LlmError> {
        Self::new(
            vec![Message {
                role: Role::User,
                content: content.into(),
            }],
            profile,
            attempt_tag,
        )
    }

    /// All message contents joined by newlines; what scripted matchers see.
    pub fn text(&self) -> String {
        self.messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// SHA-256 over the canonical JSON of every request field.
    pub fn cache_key(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("request serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

pub trait Backend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError>;

    /// Whether calls leave the process.
    fn is_network(&self) -> bool {
        false
    }

    /// Whether concurrent calls yield the same results as sequential ones.
    fn order_independent(&self) -> bool {
        true
    }

    /// Internal progress worth persisting across a resumed run.
    fn snapshot(&self) -> Option<serde_json::Value> {
        None
    }

    fn restore(&self, _state: &serde_json::Value) -> Result<(), LlmError> {
        Ok(())
    }
}
