use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use inferonomics_core::{BenchmarkRun, Sweep};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::client::Endpoint;
use crate::{aggregate, BenchError, ErrorKind, LevelSummary, RequestPayload, RequestTrace, RunConfig, TraceStatus, WorkloadSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub concurrency: u32,
    /// Whether the level made it into the sweep.
    pub included: bool,
    pub summary: Option<LevelSummary>,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub workload: String,
    pub sweep: Sweep,
    pub levels: Vec<LevelReport>,
    /// Every measured request in level order; warmup is not included.
    #[serde(skip)]
    pub traces: Vec<RequestTrace>,
}

fn dispatch_order(n: usize, seed: Option<u64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(seed) = seed {
        order.shuffle(&mut StdRng::seed_from_u64(seed));
    }
    order
}

fn auth_status(traces: &[RequestTrace]) -> Option<u16> {
    traces.iter().find_map(|t| match &t.status {
        TraceStatus::Error {
            kind: ErrorKind::Auth,
            message,
        } => Some(message.trim_start_matches("HTTP ").parse().unwrap_or(401)),
        _ => None,
    })
}

/// Closed loop: `concurrency` workers each take the next request as soon as
/// their previous one finishes. Traces come back in workload order.
async fn closed_loop(
    endpoint: &Endpoint,
    requests: &[RequestPayload],
    order: Vec<usize>,
    concurrency: u32,
) -> Result<Vec<RequestTrace>, BenchError> {
    let requests: Arc<Vec<RequestPayload>> = Arc::new(requests.to_vec());
    let order = Arc::new(order);
    let next = Arc::new(AtomicUsize::new(0));
    let stop = Arc::new(AtomicBool::new(false));
    let epoch = Instant::now();
    let workers = (concurrency as usize).min(order.len());

    let mut handles = Vec::with_capacity(workers);
    for _ in 0..workers {
        let (endpoint, requests, order, next, stop) =
            (endpoint.clone(), requests.clone(), order.clone(), next.clone(), stop.clone());
        handles.push(tokio::spawn(async move {
            let mut done = Vec::new();
            while !stop.load(Ordering::Acquire) {
                let slot = next.fetch_add(1, Ordering::AcqRel);
                let Some(&index) = order.get(slot) else { break };
                let trace = endpoint.execute(index, &requests[index], concurrency, epoch).await;
                if matches!(&trace.status, TraceStatus::Error { kind: ErrorKind::Auth, .. }) {
                    stop.store(true, Ordering::Release);
                }
                done.push(trace);
            }
            done
        }));
    }
    let mut traces = Vec::with_capacity(order.len());
    for h in handles {
        traces.extend(h.await.map_err(|e| BenchError::Client(format!("worker panicked: {e}")))?);
    }
    if let Some(status) = auth_status(&traces) {
        return Err(BenchError::Auth { status });
    }
    traces.sort_by_key(|t| t.request_index);
    Ok(traces)
}

/// Runs the whole workload once at `concurrency`.
pub async fn run_level(
    config: &RunConfig,
    workload: &WorkloadSpec,
    concurrency: u32,
) -> Result<Vec<RequestTrace>, BenchError> {
    if concurrency == 0 {
        return Err(BenchError::InvalidConfig("concurrency must be >= 1".into()));
    }
    workload.validate()?;
    let endpoint = Endpoint::new(config)?;
    let order = dispatch_order(workload.requests.len(), config.shuffle_seed);
    closed_loop(&endpoint, &workload.requests, order, concurrency).await
}

/// Warms the endpoint up, then runs every configured level.
///
/// A level with any failed request is left out of the sweep and reported
/// with a diagnostic, so every run in the sweep covers the full workload.
/// Credential errors abort the sweep.
pub async fn run_sweep(config: &RunConfig, workload: &WorkloadSpec) -> Result<SweepReport, BenchError> {
    config.validate()?;
    workload.validate()?;
    let endpoint = Endpoint::new(config)?;
    let model_id = config.model_id();

    if config.warmup_requests > 0 {
        let warm: Vec<RequestPayload> = workload
            .requests
            .iter()
            .cycle()
            .take(config.warmup_requests)
            .cloned()
            .collect();
        let conc = config.concurrency_levels[0].min(warm.len() as u32);
        let order = (0..warm.len()).collect();
        closed_loop(&endpoint, &warm, order, conc).await?;
    }

    let mut runs: Vec<BenchmarkRun> = Vec::new();
    let mut levels = Vec::new();
    let mut all = Vec::new();
    for &conc in &config.concurrency_levels {
        let order = dispatch_order(workload.requests.len(), config.shuffle_seed);
        let traces = closed_loop(&endpoint, &workload.requests, order, conc).await?;
        let report = match aggregate(&traces, conc, &model_id) {
            Ok(summary) if summary.errors.is_empty() => {
                runs.push(summary.run.clone());
                LevelReport {
                    concurrency: conc,
                    included: true,
                    summary: Some(summary),
                    diagnostic: None,
                }
            }
            Ok(summary) => {
                let diagnostic = format!(
                    "{} of {} requests failed (first: {})",
                    summary.errors.len(),
                    traces.len(),
                    summary.errors[0].message
                );
                LevelReport {
                    concurrency: conc,
                    included: false,
                    summary: Some(summary),
                    diagnostic: Some(diagnostic),
                }
            }
            Err(e) => {
                let first = traces.iter().find_map(|t| match &t.status {
                    TraceStatus::Error { message, .. } => Some(message.clone()),
                    TraceStatus::Ok => None,
                });
                LevelReport {
                    concurrency: conc,
                    included: false,
                    summary: None,
                    diagnostic: Some(match first {
                        Some(m) => format!("{e} (first error: {m})"),
                        None => e.to_string(),
                    }),
                }
            }
        };
        if let Some(d) = &report.diagnostic {
            tracing::warn!(concurrency = conc, "level omitted: {d}");
        }
        levels.push(report);
        all.extend(traces);
    }

    Ok(SweepReport {
        workload: workload.name.clone(),
        sweep: Sweep::new(model_id, runs)?,
        levels,
        traces: all,
    })
}
