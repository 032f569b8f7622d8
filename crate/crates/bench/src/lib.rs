//! Closed-loop concurrency sweeps against OpenAI-compatible streaming chat
//! endpoints.
//!
//! A sweep runs a fixed workload once per concurrency level, keeping exactly
//! `min(concurrency, remaining)` requests in flight, and records one
//! [`RequestTrace`] per request: send time, arrival of the first content
//! chunk, end of stream and token counts. [`aggregate`] folds the traces of a
//! level into a [`BenchmarkRun`](inferonomics_core::BenchmarkRun) with the same
//! columns as the reference dataset.
//!
//! [`mock`] contains a scripted server used to check the runner's timing.

mod aggregate;
mod client;
mod config;
mod error;
pub mod mock;
mod runner;
mod sse;
mod trace;
mod workload;

pub use aggregate::{aggregate, LevelSummary, TraceError};
pub use config::RunConfig;
pub use error::BenchError;
pub use runner::{run_level, run_sweep, LevelReport, SweepReport};
pub use trace::{read_trace_log, write_trace_log, ErrorKind, RequestTrace, TraceStatus};
pub use workload::{ChatMessage, RequestPayload, WorkloadSpec};
