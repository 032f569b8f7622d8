use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::BenchError;

fn default_timeout() -> f64 {
    600.0
}

fn default_warmup() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Base URL such as `http://host:8000/v1`, or the full
    /// `.../chat/completions` URL.
    pub endpoint_url: String,
    /// Model name sent in the request body.
    pub model_name: String,
    /// Identifier written to the run file; defaults to `model_name`.
    #[serde(default)]
    pub model_id: Option<String>,
    pub concurrency_levels: Vec<u32>,
    #[serde(default = "default_timeout")]
    pub request_timeout_s: f64,
    /// Requests issued before the first level and excluded from all metrics.
    #[serde(default = "default_warmup")]
    pub warmup_requests: usize,
    /// Environment variable holding the bearer token, if any.
    #[serde(default)]
    pub api_key_env: Option<String>,
    /// Shuffle the dispatch order with this seed; workload order otherwise.
    #[serde(default)]
    pub shuffle_seed: Option<u64>,
}

impl RunConfig {
    pub fn new(endpoint_url: impl Into<String>, model_name: impl Into<String>, levels: Vec<u32>) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            model_name: model_name.into(),
            model_id: None,
            concurrency_levels: levels,
            request_timeout_s: default_timeout(),
            warmup_requests: default_warmup(),
            api_key_env: None,
            shuffle_seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.concurrency_levels.is_empty() {
            return Err(BenchError::InvalidConfig("concurrency_levels must not be empty".into()));
        }
        if self.concurrency_levels.contains(&0) {
            return Err(BenchError::InvalidConfig("concurrency levels must be >= 1".into()));
        }
        if self.concurrency_levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::InvalidConfig(
                "concurrency_levels must be strictly increasing".into(),
            ));
        }
        if !(self.request_timeout_s.is_finite() && self.request_timeout_s > 0.0) {
            return Err(BenchError::InvalidConfig("request_timeout_s must be > 0".into()));
        }
        if self.model_name.trim().is_empty() {
            return Err(BenchError::InvalidConfig("model_name must not be empty".into()));
        }
        let url = self.endpoint_url.trim();
        if !(url.starts_with("http://") || url.starts_with("https://")) {
            return Err(BenchError::InvalidConfig(format!(
                "endpoint_url must be an http(s) URL, got `{url}`"
            )));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.request_timeout_s)
    }

    pub fn chat_completions_url(&self) -> String {
        let base = self.endpoint_url.trim().trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }

    pub fn model_id(&self) -> String {
        inferonomics_core::dataset::normalize_model_id(
            self.model_id.as_deref().unwrap_or(&self.model_name),
        )
    }

    /// Reads the bearer token from the configured environment variable.
    pub fn api_key(&self) -> Option<String> {
        self.api_key_env
            .as_deref()
            .and_then(|var| std::env::var(var).ok())
            .filter(|v| !v.is_empty())
    }
}
