//! Economics of LLM inference: GPU hourly cost, per-run cost, optimal
//! concurrency under service-level thresholds and the cost-quality frontier.
//!
//! The crate is split along the lines of the workflow:
//!
//! * [`cost_model`] turns hardware parameters into USD/hour and USD/run.
//! * [`dataset`] holds benchmark runs, their ingestion and the embedded
//!   WiNEval-3.0 reference sweeps.
//! * [`selection`] picks the cheapest feasible concurrency per model and
//!   builds the Pareto frontier over those choices.
//! * [`reporting`] renders comparison tables and the frontier bubble chart.
//!
//! Everything here is a pure function over value types.

pub mod cost_model;
pub mod dataset;
pub mod reporting;
pub mod selection;

pub use cost_model::{ClusterSpec, CostError, GpuCostParams, HourlyCostBreakdown};
pub use dataset::{BenchmarkRun, Dataset, DatasetError, ModelCard, Sweep};
pub use selection::{
    Frontier, OptimalChoice, ParetoPoint, PerfThresholds, SelectionError, WhatIfResult,
};
