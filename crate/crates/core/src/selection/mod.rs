//! Optimal-concurrency selection under service-level thresholds, the
//! cost-quality Pareto frontier and what-if re-evaluation.

mod frontier;
mod scaling;
mod whatif;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost_model::{self, CostError};
use crate::dataset::{BenchmarkRun, DatasetError, Sweep};

pub use frontier::{dominates, pareto_frontier, DominatedPoint, Frontier, ParetoPoint};
pub use scaling::{scaling_analysis, ScalingAnalysis, ScalingStep};
pub use whatif::{evaluate, what_if, WhatIfResult};

/// Interactive service-level targets. Both bounds are strict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerfThresholds {
    /// Average TTFT must be strictly below this, seconds.
    #[serde(default = "default_max_ttft")]
    pub max_ttft_s: f64,
    /// Average per-request throughput must be strictly above this, tokens/s.
    #[serde(default = "default_min_throughput")]
    pub min_throughput_tok_s: f64,
}

fn default_max_ttft() -> f64 {
    1.0
}

fn default_min_throughput() -> f64 {
    20.0
}

impl Default for PerfThresholds {
    fn default() -> Self {
        Self {
            max_ttft_s: default_max_ttft(),
            min_throughput_tok_s: default_min_throughput(),
        }
    }
}

impl PerfThresholds {
    pub fn validate(&self) -> Result<(), SelectionError> {
        for (field, value) in [
            ("max_ttft_s", self.max_ttft_s),
            ("min_throughput_tok_s", self.min_throughput_tok_s),
        ] {
            if value.is_nan() || value <= 0.0 {
                return Err(SelectionError::InvalidThreshold { field, value });
            }
        }
        Ok(())
    }

    /// Thresholds this run breaks; empty when the run is feasible.
    // Negated so NaN metrics count as violations.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn violations(&self, run: &BenchmarkRun) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(run.avg_ttft_s < self.max_ttft_s) {
            out.push(Violation::Ttft {
                observed_s: run.avg_ttft_s,
                max_s: self.max_ttft_s,
            });
        }
        if !(run.avg_throughput_tok_s > self.min_throughput_tok_s) {
            out.push(Violation::Throughput {
                observed_tok_s: run.avg_throughput_tok_s,
                min_tok_s: self.min_throughput_tok_s,
            });
        }
        out
    }

    pub fn admits(&self, run: &BenchmarkRun) -> bool {
        run.avg_ttft_s < self.max_ttft_s && run.avg_throughput_tok_s > self.min_throughput_tok_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "threshold", rename_all = "snake_case")]
pub enum Violation {
    Ttft { observed_s: f64, max_s: f64 },
    Throughput { observed_tok_s: f64, min_tok_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub concurrency: u32,
    pub violations: Vec<Violation>,
}

/// The selected configuration of one model, or an explicit infeasible result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalChoice {
    pub model_id: String,
    pub feasible: bool,
    pub concurrency: Option<u32>,
    pub run: Option<BenchmarkRun>,
    /// Cost of the chosen run at the evaluation's hourly rate, unrounded.
    pub cost_usd: Option<f64>,
    /// Every level that failed a threshold, in concurrency order.
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("sweep `{0}` has no runs")]
    EmptySweep(String),
    #[error("sweep `{model_id}` needs at least 2 runs, has {runs}")]
    TooFewRuns { model_id: String, runs: usize },
    #[error("duplicate model id `{0}`")]
    DuplicateModel(String),
    #[error("invalid point `{model_id}`: {reason}")]
    InvalidPoint { model_id: String, reason: String },
    #[error("invalid threshold `{field}`: {value} (expected > 0)")]
    InvalidThreshold { field: &'static str, value: f64 },
    #[error("no quality score for model `{0}`")]
    MissingScore(String),
    #[error("dataset contains no sweeps")]
    EmptyDataset,
    #[error("frontier needs at least one point")]
    NoPoints,
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Runs meeting both thresholds, in concurrency order.
pub fn feasible_configs<'a>(sweep: &'a Sweep, thresholds: &PerfThresholds) -> Vec<&'a BenchmarkRun> {
    sweep.runs().iter().filter(|r| thresholds.admits(r)).collect()
}

/// Picks the feasible run with the shortest total time, which is the cheapest
/// at any fixed hourly rate. Equal times go to the lower concurrency.
pub fn select_optimal(
    sweep: &Sweep,
    thresholds: &PerfThresholds,
    hourly_usd: f64,
) -> Result<OptimalChoice, SelectionError> {
    thresholds.validate()?;
    if !(hourly_usd.is_finite() && hourly_usd > 0.0) {
        return Err(CostError::Invalid {
            field: "hourly_usd",
            value: hourly_usd,
            expected: "finite and > 0",
        }
        .into());
    }
    if sweep.runs().is_empty() {
        return Err(SelectionError::EmptySweep(sweep.model_id().to_string()));
    }

    let rejected = sweep
        .runs()
        .iter()
        .filter_map(|r| {
            let violations = thresholds.violations(r);
            (!violations.is_empty()).then_some(Rejection {
                concurrency: r.concurrency,
                violations,
            })
        })
        .collect();

    // Runs are in ascending concurrency, so keeping the first strict minimum
    // resolves ties toward lower concurrency.
    let best = feasible_configs(sweep, thresholds)
        .into_iter()
        .fold(None::<&BenchmarkRun>, |best, r| match best {
            Some(b) if b.total_time_s <= r.total_time_s => Some(b),
            _ => Some(r),
        });

    Ok(match best {
        Some(run) => {
            let cost = cost_model::run_cost(hourly_usd, run.total_time_s)?;
            OptimalChoice {
                model_id: sweep.model_id().to_string(),
                feasible: true,
                concurrency: Some(run.concurrency),
                run: Some(BenchmarkRun {
                    cost_usd: Some(cost),
                    ..run.clone()
                }),
                cost_usd: Some(cost),
                rejected,
            }
        }
        None => OptimalChoice {
            model_id: sweep.model_id().to_string(),
            feasible: false,
            concurrency: None,
            run: None,
            cost_usd: None,
            rejected,
        },
    })
}
