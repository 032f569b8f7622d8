use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }
}

/// One chat-completion request of a workload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestPayload {
    pub messages: Vec<ChatMessage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

/// An ordered request set replayed at every concurrency level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub name: String,
    pub requests: Vec<RequestPayload>,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.requests.is_empty() {
            return Err(BenchError::InvalidWorkload(format!("`{}` has no requests", self.name)));
        }
        if let Some(i) = self.requests.iter().position(|r| r.messages.is_empty()) {
            return Err(BenchError::InvalidWorkload(format!("request {i} has no messages")));
        }
        Ok(())
    }

    /// `count` copies of a single-turn prompt.
    pub fn repeated(name: &str, prompt: &str, count: usize, max_tokens: Option<u32>) -> Self {
        Self {
            name: name.to_string(),
            requests: (0..count)
                .map(|_| RequestPayload {
                    messages: vec![ChatMessage::user(prompt)],
                    max_tokens,
                    temperature: Some(0.0),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| BenchError::InvalidWorkload(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self, BenchError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
