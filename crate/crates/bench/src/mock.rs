//! Scripted OpenAI-compatible streaming server.
//!
//! Each response waits `ttft` before the first content chunk and `gap`
//! between later chunks, each chunk carrying one token. A request can
//! override the script with `key=value` directives anywhere in its last
//! message: `ttft_ms`, `gap_ms`, `tokens`, `prompt_tokens`, `status` (reply
//! with that HTTP status instead of a stream), `abort_after` (drop the
//! connection after that many tokens) and `usage` (`0` or `1`).

use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::body::{Body, Bytes};
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

#[derive(Debug, Clone, PartialEq)]
pub struct MockScript {
    pub ttft: Duration,
    pub gap: Duration,
    pub tokens: u32,
    pub prompt_tokens: u32,
    /// Send a usage chunk when the client asks for one.
    pub report_usage: bool,
    /// Require `Authorization: Bearer <key>`.
    pub api_key: Option<String>,
}

impl Default for MockScript {
    fn default() -> Self {
        Self {
            ttft: Duration::from_millis(50),
            gap: Duration::from_millis(10),
            tokens: 16,
            prompt_tokens: 32,
            report_usage: true,
            api_key: None,
        }
    }
}

#[derive(Debug, Clone)]
struct Plan {
    ttft: Duration,
    gap: Duration,
    tokens: u32,
    prompt_tokens: u32,
    usage: bool,
    status: u16,
    abort_after: Option<u32>,
}

impl Plan {
    fn new(script: &MockScript, text: &str) -> Self {
        let mut plan = Plan {
            ttft: script.ttft,
            gap: script.gap,
            tokens: script.tokens,
            prompt_tokens: script.prompt_tokens,
            usage: script.report_usage,
            status: 200,
            abort_after: None,
        };
        for word in text.split_whitespace() {
            let Some((key, value)) = word.split_once('=') else { continue };
            let Ok(n) = value.parse::<u64>() else { continue };
            match key {
                "ttft_ms" => plan.ttft = Duration::from_millis(n),
                "gap_ms" => plan.gap = Duration::from_millis(n),
                "tokens" => plan.tokens = n as u32,
                "prompt_tokens" => plan.prompt_tokens = n as u32,
                "status" => plan.status = n as u16,
                "abort_after" => plan.abort_after = Some(n as u32),
                "usage" => plan.usage = n != 0,
                _ => {}
            }
        }
        plan
    }
}

/// Counters shared with the server.
#[derive(Debug, Default)]
pub struct MockStats {
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
    served: AtomicUsize,
}

impl MockStats {
    /// Highest number of simultaneously open requests seen so far.
    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }

    pub fn served(&self) -> usize {
        self.served.load(Ordering::SeqCst)
    }

    pub fn reset_max(&self) {
        self.max_in_flight.store(self.in_flight.load(Ordering::SeqCst), Ordering::SeqCst);
    }
}

struct InFlight(Arc<MockStats>);

impl InFlight {
    fn enter(stats: &Arc<MockStats>) -> Self {
        let now = stats.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        stats.max_in_flight.fetch_max(now, Ordering::SeqCst);
        stats.served.fetch_add(1, Ordering::SeqCst);
        Self(stats.clone())
    }
}

impl Drop for InFlight {
    fn drop(&mut self) {
        self.0.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

#[derive(Clone)]
struct AppState {
    script: Arc<MockScript>,
    stats: Arc<MockStats>,
}

fn error(status: StatusCode, message: &str) -> Response {
    (status, axum::Json(json!({"error": {"message": message}}))).into_response()
}

fn chunk(id: &str, model: &str, delta: Value, finish: Option<&str>) -> String {
    json!({
        "id": id,
        "object": "chat.completion.chunk",
        "model": model,
        "choices": [{"index": 0, "delta": delta, "finish_reason": finish}],
    })
    .to_string()
}

async fn completions(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Response {
    if let Some(key) = &state.script.api_key {
        let expected = format!("Bearer {key}");
        let given = headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok());
        if given != Some(expected.as_str()) {
            return error(StatusCode::UNAUTHORIZED, "invalid api key");
        }
    }
    let Ok(req) = serde_json::from_slice::<Value>(&body) else {
        return error(StatusCode::BAD_REQUEST, "body is not JSON");
    };
    if req.get("stream").and_then(Value::as_bool) != Some(true) {
        return error(StatusCode::BAD_REQUEST, "only streaming requests are supported");
    }
    let text = req
        .get("messages")
        .and_then(Value::as_array)
        .and_then(|m| m.last())
        .and_then(|m| m.get("content"))
        .and_then(Value::as_str)
        .unwrap_or("");
    let plan = Plan::new(&state.script, text);
    let guard = InFlight::enter(&state.stats);
    if plan.status != 200 {
        let status = StatusCode::from_u16(plan.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        return error(status, "scripted failure");
    }
    let model = req.get("model").and_then(Value::as_str).unwrap_or("mock").to_string();
    let wants_usage = req
        .pointer("/stream_options/include_usage")
        .and_then(Value::as_bool)
        .unwrap_or(false);

    let id = format!("mock-{}", state.stats.served());
    let mut events: Vec<(Duration, String)> = vec![(
        Duration::ZERO,
        chunk(&id, &model, json!({"role": "assistant", "content": ""}), None),
    )];
    let mut aborted = false;
    for i in 0..plan.tokens {
        if plan.abort_after == Some(i) {
            aborted = true;
            break;
        }
        let delay = if i == 0 { plan.ttft } else { plan.gap };
        events.push((delay, chunk(&id, &model, json!({"content": format!("t{i} ")}), None)));
    }
    if !aborted && plan.abort_after.is_some_and(|n| n >= plan.tokens) {
        aborted = true;
    }
    if !aborted {
        events.push((Duration::ZERO, chunk(&id, &model, json!({}), Some("stop"))));
        if plan.usage && wants_usage {
            let usage = json!({
                "id": id,
                "object": "chat.completion.chunk",
                "model": model,
                "choices": [],
                "usage": {
                    "prompt_tokens": plan.prompt_tokens,
                    "completion_tokens": plan.tokens,
                    "total_tokens": plan.prompt_tokens + plan.tokens,
                },
            });
            events.push((Duration::ZERO, usage.to_string()));
        }
        events.push((Duration::ZERO, "[DONE]".to_string()));
    }

    let stream = futures::stream::unfold((events.into_iter(), guard), |(mut it, guard)| async move {
        let (delay, data) = it.next()?;
        if !delay.is_zero() {
            tokio::time::sleep(delay).await;
        }
        Some((Ok::<_, Infallible>(Bytes::from(format!("data: {data}\n\n"))), (it, guard)))
    });
    Response::builder()
        .header(header::CONTENT_TYPE, "text/event-stream")
        .header(header::CACHE_CONTROL, "no-cache")
        .body(Body::from_stream(stream))
        .expect("static response parts")
}

/// Routes `POST /v1/chat/completions` and `POST /chat/completions`.
pub fn router(script: MockScript) -> (Router, Arc<MockStats>) {
    let stats = Arc::new(MockStats::default());
    let state = AppState {
        script: Arc::new(script),
        stats: stats.clone(),
    };
    let app = Router::new()
        .route("/v1/chat/completions", post(completions))
        .route("/chat/completions", post(completions))
        .with_state(state);
    (app, stats)
}

/// Serves the mock on `listener` until `shutdown` resolves.
pub async fn serve<F>(listener: TcpListener, script: MockScript, shutdown: F) -> std::io::Result<()>
where
    F: std::future::Future<Output = ()> + Send + 'static,
{
    let (app, _) = router(script);
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}

/// A mock bound to an ephemeral loopback port, stopped on [`MockServer::stop`]
/// or drop.
pub struct MockServer {
    addr: SocketAddr,
    stats: Arc<MockStats>,
    shutdown: Option<oneshot::Sender<()>>,
    task: Option<JoinHandle<()>>,
}

impl MockServer {
    pub async fn start(script: MockScript) -> std::io::Result<Self> {
        let listener = TcpListener::bind(("127.0.0.1", 0)).await?;
        let addr = listener.local_addr()?;
        let (app, stats) = router(script);
        let (tx, rx) = oneshot::channel::<()>();
        let task = tokio::spawn(async move {
            let _ = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
        });
        Ok(Self {
            addr,
            stats,
            shutdown: Some(tx),
            task: Some(task),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://127.0.0.1:<port>/v1`
    pub fn base_url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    pub fn stats(&self) -> &MockStats {
        &self.stats
    }

    pub async fn stop(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(task) = self.task.take() {
            let _ = task.await;
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directives_override_script() {
        let p = Plan::new(&MockScript::default(), "hello ttft_ms=5 tokens=3 status=503 usage=0 x=y junk");
        assert_eq!(p.ttft, Duration::from_millis(5));
        assert_eq!(p.gap, Duration::from_millis(10));
        assert_eq!(p.tokens, 3);
        assert_eq!(p.status, 503);
        assert!(!p.usage);
        assert_eq!(p.abort_after, None);
    }
}
