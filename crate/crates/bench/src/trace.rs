use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Connect,
    Timeout,
    Auth,
    HttpStatus,
    /// Stream ended without the terminal marker.
    StreamAborted,
    MalformedChunk,
    ServerError,
    /// Stream finished without any content.
    EmptyResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TraceStatus {
    Ok,
    Error { kind: ErrorKind, message: String },
}

/// Timing of one request. Timestamps are seconds since the start of its
/// concurrency level, from a monotonic clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestTrace {
    /// Position in the workload.
    pub request_index: usize,
    pub concurrency: u32,
    pub send_ts: f64,
    /// Arrival of the first chunk carrying content.
    pub first_token_ts: Option<f64>,
    pub end_ts: f64,
    pub input_tokens: u64,
    pub output_tokens: u64,
    /// Token counts came from the server's usage report rather than from
    /// counting content chunks.
    pub usage_reported: bool,
    pub status: TraceStatus,
}

impl RequestTrace {
    pub fn is_ok(&self) -> bool {
        matches!(self.status, TraceStatus::Ok)
    }

    pub fn ttft(&self) -> Option<f64> {
        self.first_token_ts.map(|t| t - self.send_ts)
    }
}

/// One JSON object per line.
pub fn write_trace_log<W: Write>(mut out: W, traces: &[RequestTrace]) -> std::io::Result<()> {
    for t in traces {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_trace_log<R: BufRead>(input: R) -> std::io::Result<Vec<RequestTrace>> {
    let mut traces = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {e}", n + 1))
        })?;
        traces.push(t);
    }
    Ok(traces)
}
