use std::thread;
use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::{Backend, ChatRequest, LlmError, Message};

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "APIO_API_KEY";

const MAX_BACKOFF: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpenAiConfig {
    pub base_url: String,
    pub model: String,
    /// Retries after the first attempt.
    pub retry_max: u32,
    pub timeout_s: u64,
    /// First backoff delay; doubled on every retry.
    pub backoff_ms: u64,
    pub max_tokens: u32,
}

impl Default for OpenAiConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o-mini".into(),
            retry_max: 5,
            timeout_s: 60,
            backoff_ms: 500,
            max_tokens: super::DEFAULT_MAX_TOKENS,
        }
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [Message],
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Blocking client for OpenAI-style `/chat/completions` endpoints.
pub struct OpenAiBackend {
    config: OpenAiConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
}

enum Failure {
    Retryable(String),
    Fatal(LlmError),
}

impl OpenAiBackend {
    /// Reads the token from [`API_KEY_ENV`]; a missing token sends no
    /// `Authorization` header.
    pub fn from_env(config: OpenAiConfig) -> Self {
        let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::new(config, api_key)
    }

    pub fn new(config: OpenAiConfig, api_key: Option<String>) -> Self {
        let agent_config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_s)))
            .http_status_as_error(false)
            .build();
        Self {
            agent: ureq::Agent::new_with_config(agent_config),
            config,
            api_key,
        }
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, request: &ChatRequest) -> Result<String, Failure> {
        let body = WireRequest {
            model: &request.profile.model_id,
            messages: &request.messages,
            temperature: request.profile.temperature,
            top_p: request.profile.top_p,
            max_tokens: request.profile.max_tokens,
        };
        let mut call = self.agent.post(self.endpoint());
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = match call.send_json(&body) {
            Ok(r) => r,
            Err(e) => return Err(Failure::Retryable(e.to_string())),
        };
        let status = response.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => {
                return Err(Failure::Fatal(LlmError::Credential(format!(
                    "HTTP {status} from {}",
                    self.endpoint()
                ))))
            }
            408 | 409 | 429 | 500..=599 => {
                return Err(Failure::Retryable(format!("HTTP {status}")));
            }
            _ => {
                let text = response.body_mut().read_to_string().unwrap_or_default();
                return Err(Failure::Fatal(LlmError::Backend(format!(
                    "HTTP {status}: {text}"
                ))));
            }
        }
        let parsed: WireResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| Failure::Fatal(LlmError::Backend(format!("malformed response: {e}"))))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        if content.trim().is_empty() {
            return Err(Failure::Fatal(LlmError::Backend("empty completion".into())));
        }
        Ok(content)
    }
}

impl Backend for OpenAiBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let mut delay = Duration::from_millis(self.config.backoff_ms);
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(request) {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(message)) => {
                    if attempts > self.config.retry_max {
                        return Err(LlmError::Transport { attempts, message });
                    }
                    warn!("attempt {attempts} failed ({message}); retrying in {delay:?}");
                    thread::sleep(delay);
                    delay = (delay * 2).min(MAX_BACKOFF);
                }
            }
            debug!("retrying {}", self.endpoint());
        }
    }

    fn is_network(&self) -> bool {
        true
    }
}
