use inferonomics_core::BenchmarkRun;
use serde::{Deserialize, Serialize};

use crate::{BenchError, ErrorKind, RequestTrace, TraceStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceError {
    pub request_index: usize,
    pub kind: ErrorKind,
    pub message: String,
}

/// Metrics of one concurrency level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    /// Computed over successful requests only; `request_count` is their
    /// number.
    pub run: BenchmarkRun,
    /// Mean of output tokens over full request latency, send to end.
    pub e2e_throughput_tok_s: f64,
    /// Successful requests left out of `avg_throughput_tok_s` because the
    /// whole output arrived in the first chunk.
    pub single_chunk_excluded: usize,
    pub errors: Vec<TraceError>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Folds the traces of one level into a run row.
///
/// Total time spans the earliest send to the latest end among successful
/// requests. TTFT is averaged over successful requests; streaming throughput
/// is `output_tokens / (end - first_token)` averaged over those whose stream
/// lasted beyond the first chunk.
pub fn aggregate(traces: &[RequestTrace], concurrency: u32, model_id: &str) -> Result<LevelSummary, BenchError> {
    let ok: Vec<&RequestTrace> = traces.iter().filter(|t| t.is_ok()).collect();
    let errors: Vec<TraceError> = traces
        .iter()
        .filter_map(|t| match &t.status {
            TraceStatus::Ok => None,
            TraceStatus::Error { kind, message } => Some(TraceError {
                request_index: t.request_index,
                kind: *kind,
                message: message.clone(),
            }),
        })
        .collect();
    if ok.is_empty() {
        return Err(BenchError::NoSuccessfulRequests { concurrency });
    }

    let start = ok.iter().map(|t| t.send_ts).fold(f64::INFINITY, f64::min);
    let end = ok.iter().map(|t| t.end_ts).fold(f64::NEG_INFINITY, f64::max);
    let avg_ttft_s = mean(ok.iter().filter_map(|t| t.ttft()));

    let mut excluded = 0;
    let mut rates = Vec::with_capacity(ok.len());
    for t in &ok {
        match t.first_token_ts {
            Some(first) if t.end_ts > first => rates.push(t.output_tokens as f64 / (t.end_ts - first)),
            _ => excluded += 1,
        }
    }
    let e2e = mean(
        ok.iter()
            .filter(|t| t.end_ts > t.send_ts)
            .map(|t| t.output_tokens as f64 / (t.end_ts - t.send_ts)),
    );

    let input_tokens: u64 = ok.iter().map(|t| t.input_tokens).sum();
    let output_tokens: u64 = ok.iter().map(|t| t.output_tokens).sum();
    let run = BenchmarkRun {
        model_id: model_id.to_string(),
        concurrency,
        request_count: u32::try_from(ok.len()).unwrap_or(u32::MAX),
        total_time_s: end - start,
        avg_ttft_s,
        input_tokens,
        output_tokens,
        total_tokens: input_tokens + output_tokens,
        avg_throughput_tok_s: mean(rates.into_iter()),
        cost_usd: None,
    };
    Ok(LevelSummary {
        run,
        e2e_throughput_tok_s: e2e,
        single_chunk_excluded: excluded,
        errors,
    })
}
