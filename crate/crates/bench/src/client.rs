use std::time::{Duration, Instant};

use futures::StreamExt;
use serde_json::{json, Value};

use crate::sse::SseDecoder;
use crate::{BenchError, ErrorKind, RequestPayload, RequestTrace, RunConfig, TraceStatus};

#[derive(Debug)]
struct Failure {
    kind: ErrorKind,
    message: String,
}

impl Failure {
    fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

#[derive(Debug, Default)]
struct Progress {
    first_content: Option<Instant>,
    content_chunks: u64,
    usage: Option<(u64, u64)>,
    done: Option<Instant>,
}

#[derive(Debug)]
enum Chunk {
    Continue,
    Done,
}

/// A configured streaming chat-completions endpoint.
#[derive(Debug, Clone)]
pub(crate) struct Endpoint {
    client: reqwest::Client,
    url: String,
    model: String,
    api_key: Option<String>,
    timeout: Duration,
}

fn is_loopback(url: &str) -> bool {
    let rest = url.split_once("://").map_or(url, |(_, r)| r);
    let host = rest.split(['/', '?']).next().unwrap_or("");
    let host = host.rsplit_once('@').map_or(host, |(_, h)| h);
    host.starts_with("localhost") || host.starts_with("127.") || host.starts_with("[::1]")
}

impl Endpoint {
    pub(crate) fn new(config: &RunConfig) -> Result<Self, BenchError> {
        let url = config.chat_completions_url();
        let mut builder = reqwest::Client::builder()
            .connect_timeout(config.timeout())
            .pool_max_idle_per_host(usize::MAX);
        if is_loopback(&url) {
            builder = builder.no_proxy();
        }
        Ok(Self {
            client: builder.build().map_err(|e| BenchError::Client(e.to_string()))?,
            url,
            model: config.model_name.clone(),
            api_key: config.api_key(),
            timeout: config.timeout(),
        })
    }

    /// Sends one request and times it against `epoch`. Never fails; errors
    /// are recorded in the trace.
    pub(crate) async fn execute(
        &self,
        request_index: usize,
        payload: &RequestPayload,
        concurrency: u32,
        epoch: Instant,
    ) -> RequestTrace {
        let mut progress = Progress::default();
        let send = Instant::now();
        let outcome = match tokio::time::timeout(self.timeout, self.stream(payload, &mut progress)).await {
            Ok(r) => r,
            Err(_) => Err(Failure::new(
                ErrorKind::Timeout,
                format!("no complete response within {:.1}s", self.timeout.as_secs_f64()),
            )),
        };
        let end = progress.done.unwrap_or_else(Instant::now);
        let outcome = outcome.and_then(|()| {
            if progress.first_content.is_none() {
                Err(Failure::new(ErrorKind::EmptyResponse, "stream carried no content"))
            } else {
                Ok(())
            }
        });
        let secs = |t: Instant| t.saturating_duration_since(epoch).as_secs_f64();
        let (input_tokens, output_tokens) = progress.usage.unwrap_or((0, progress.content_chunks));
        RequestTrace {
            request_index,
            concurrency,
            send_ts: secs(send),
            first_token_ts: progress.first_content.map(secs),
            end_ts: secs(end),
            input_tokens,
            output_tokens,
            usage_reported: progress.usage.is_some(),
            status: match outcome {
                Ok(()) => TraceStatus::Ok,
                Err(f) => TraceStatus::Error {
                    kind: f.kind,
                    message: f.message,
                },
            },
        }
    }

    async fn stream(&self, payload: &RequestPayload, progress: &mut Progress) -> Result<(), Failure> {
        let mut body = json!({
            "model": self.model,
            "messages": payload.messages,
            "stream": true,
            "stream_options": {"include_usage": true},
        });
        if let Some(n) = payload.max_tokens {
            body["max_tokens"] = json!(n);
        }
        if let Some(t) = payload.temperature {
            body["temperature"] = json!(t);
        }
        let mut req = self
            .client
            .post(&self.url)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .header(reqwest::header::ACCEPT, "text/event-stream")
            .body(body.to_string());
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().await.map_err(|e| {
            let kind = if e.is_timeout() { ErrorKind::Timeout } else { ErrorKind::Connect };
            Failure::new(kind, e.to_string())
        })?;
        let status = resp.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(Failure::new(ErrorKind::Auth, format!("HTTP {}", status.as_u16())));
        }
        if !status.is_success() {
            let text = resp.text().await.unwrap_or_default();
            let snippet: String = text.chars().take(200).collect();
            return Err(Failure::new(
                ErrorKind::HttpStatus,
                format!("HTTP {}: {snippet}", status.as_u16()),
            ));
        }

        let mut decoder = SseDecoder::default();
        let mut bytes = resp.bytes_stream();
        while let Some(chunk) = bytes.next().await {
            let chunk = chunk.map_err(|e| Failure::new(ErrorKind::StreamAborted, e.to_string()))?;
            for data in decoder.push(&chunk) {
                if let Chunk::Done = handle(&data, progress)? {
                    return Ok(());
                }
            }
        }
        for data in decoder.finish() {
            if let Chunk::Done = handle(&data, progress)? {
                return Ok(());
            }
        }
        Err(Failure::new(ErrorKind::StreamAborted, "stream ended before [DONE]"))
    }
}

fn has_content(choice: &Value) -> bool {
    let non_empty = |v: Option<&Value>| v.and_then(Value::as_str).is_some_and(|s| !s.is_empty());
    let delta = choice.get("delta");
    non_empty(delta.and_then(|d| d.get("content")))
        || non_empty(delta.and_then(|d| d.get("reasoning_content")))
        || non_empty(choice.get("text"))
}

fn handle(data: &str, progress: &mut Progress) -> Result<Chunk, Failure> {
    let now = Instant::now();
    if data.trim() == "[DONE]" {
        progress.done = Some(now);
        return Ok(Chunk::Done);
    }
    let v: Value = serde_json::from_str(data)
        .map_err(|e| Failure::new(ErrorKind::MalformedChunk, format!("{e}: {data}")))?;
    if let Some(err) = v.get("error") {
        return Err(Failure::new(ErrorKind::ServerError, err.to_string()));
    }
    if let Some(choices) = v.get("choices").and_then(Value::as_array) {
        if choices.iter().any(has_content) {
            progress.first_content.get_or_insert(now);
            progress.content_chunks += 1;
        }
    }
    if let Some(usage) = v.get("usage").filter(|u| u.is_object()) {
        let field = |name: &str| usage.get(name).and_then(Value::as_u64);
        if let Some(out) = field("completion_tokens") {
            progress.usage = Some((field("prompt_tokens").unwrap_or(0), out));
        }
    }
    Ok(Chunk::Continue)
}
