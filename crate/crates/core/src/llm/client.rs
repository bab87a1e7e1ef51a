use std::sync::Arc;

use super::{ChatRequest, Gateway, GenerationProfile, LlmError};

/// A gateway bound to one model. The engine only talks to models through
/// this type.
#[derive(Clone)]
pub struct Client {
    gateway: Arc<Gateway>,
    model_id: String,
    max_tokens: u32,
}

impl Client {
    pub fn new(gateway: Arc<Gateway>, model_id: impl Into<String>, max_tokens: u32) -> Self {
        Self {
            gateway,
            model_id: model_id.into(),
            max_tokens,
        }
    }

    pub fn gateway(&self) -> &Arc<Gateway> {
        &self.gateway
    }

    /// Sampling call for meta-prompts. `attempt_tag` separates repeated
    /// samples of the same text.
    pub fn explore(&self, prompt: &str, attempt_tag: u32) -> Result<String, LlmError> {
        let profile = GenerationProfile::explore(self.model_id.clone(), self.max_tokens);
        self.gateway
            .complete(&ChatRequest::user(prompt, profile, attempt_tag)?)
    }

    /// Near-greedy call for running a task prompt.
    pub fn infer(&self, prompt: &str) -> Result<String, LlmError> {
        let profile = GenerationProfile::infer(self.model_id.clone(), self.max_tokens);
        self.gateway.complete(&ChatRequest::user(prompt, profile, 0)?)
    }

    pub fn parallel_safe(&self) -> bool {
        self.gateway.parallel_safe()
    }
}
