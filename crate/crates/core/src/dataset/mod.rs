//! Benchmark-run data model, ingestion and the embedded reference dataset.

mod fixture;
mod ingest;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost_model::{self, CostError};

pub use fixture::{canonical_fixture, canonical_dataset, FIXTURE_DATASET_ID, FIXTURE_REQUEST_COUNT};
pub use ingest::{
    parse_dataset, parse_dataset_value, parse_model_cards, parse_runs, write_model_cards,
    write_runs, Format, RUN_COLUMNS,
};

/// One model measured at one concurrency level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRun {
    pub model_id: String,
    pub concurrency: u32,
    pub request_count: u32,
    /// Wall time to complete every request, seconds.
    pub total_time_s: f64,
    pub avg_ttft_s: f64,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub total_tokens: u64,
    /// Mean per-request decode rate, tokens/second.
    pub avg_throughput_tok_s: f64,
    /// Published or computed cost of the whole run, USD.
    #[serde(default)]
    pub cost_usd: Option<f64>,
}

/// A single invariant violation found while validating a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowViolation {
    /// 1-based data row (header excluded) or array index + 1 for JSON.
    pub row: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for RowViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: `{}` {}", self.row, self.field, self.message)
    }
}

impl BenchmarkRun {
    /// Checks every field invariant, returning all violations rather than the
    /// first one.
    pub fn violations(&self, row: usize) -> Vec<RowViolation> {
        let mut out = Vec::new();
        let mut flag = |field: &str, message: String| {
            out.push(RowViolation {
                row,
                field: field.to_string(),
                message,
            })
        };
        if self.model_id.trim().is_empty() {
            flag("model_id", "must not be empty".into());
        }
        if self.concurrency < 1 {
            flag("concurrency", "must be >= 1".into());
        }
        if self.request_count < 1 {
            flag("request_count", "must be >= 1".into());
        }
        if !(self.total_time_s.is_finite() && self.total_time_s > 0.0) {
            flag("total_time_s", format!("must be finite and > 0, got {}", self.total_time_s));
        }
        if !(self.avg_ttft_s.is_finite() && self.avg_ttft_s >= 0.0) {
            flag("avg_ttft_s", format!("must be finite and >= 0, got {}", self.avg_ttft_s));
        }
        if !(self.avg_throughput_tok_s.is_finite() && self.avg_throughput_tok_s >= 0.0) {
            flag(
                "avg_throughput_tok_s",
                format!("must be finite and >= 0, got {}", self.avg_throughput_tok_s),
            );
        }
        if let Some(cost) = self.cost_usd {
            if !(cost.is_finite() && cost >= 0.0) {
                flag("cost_usd", format!("must be finite and >= 0, got {cost}"));
            }
        }
        if self.input_tokens.checked_add(self.output_tokens) != Some(self.total_tokens) {
            flag(
                "total_tokens",
                format!(
                    "{} != input_tokens + output_tokens ({} + {})",
                    self.total_tokens, self.input_tokens, self.output_tokens
                ),
            );
        }
        out
    }
}

/// Externally supplied description and quality score of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCard {
    pub model_id: String,
    pub params_billion: f64,
    /// Benchmark average score on a 0-100 scale.
    pub quality_score: f64,
    #[serde(default)]
    pub notes: String,
}

impl ModelCard {
    pub fn violations(&self, row: usize) -> Vec<RowViolation> {
        let mut out = Vec::new();
        if self.model_id.trim().is_empty() {
            out.push(RowViolation {
                row,
                field: "model_id".into(),
                message: "must not be empty".into(),
            });
        }
        if !(self.params_billion.is_finite() && self.params_billion > 0.0) {
            out.push(RowViolation {
                row,
                field: "params_billion".into(),
                message: format!("must be finite and > 0, got {}", self.params_billion),
            });
        }
        if !(self.quality_score.is_finite() && (0.0..=100.0).contains(&self.quality_score)) {
            out.push(RowViolation {
                row,
                field: "quality_score".into(),
                message: format!("must be in [0, 100], got {}", self.quality_score),
            });
        }
        out
    }
}

/// All runs of one model, ordered by strictly increasing concurrency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    model_id: String,
    runs: Vec<BenchmarkRun>,
}

impl Sweep {
    /// Sorts `runs` by concurrency and checks the sweep invariants: a single
    /// model id, unique concurrency levels and a common request count.
    pub fn new(model_id: impl Into<String>, mut runs: Vec<BenchmarkRun>) -> Result<Self, DatasetError> {
        let model_id = model_id.into();
        let mut violations = Vec::new();
        for (i, run) in runs.iter().enumerate() {
            violations.extend(run.violations(i + 1));
            if run.model_id != model_id {
                violations.push(RowViolation {
                    row: i + 1,
                    field: "model_id".into(),
                    message: format!("`{}` does not belong to sweep `{model_id}`", run.model_id),
                });
            }
        }
        if !violations.is_empty() {
            return Err(DatasetError::Invalid(violations));
        }
        runs.sort_by_key(|r| r.concurrency);
        if let Some(w) = runs.windows(2).find(|w| w[0].concurrency == w[1].concurrency) {
            return Err(DatasetError::DuplicateRun {
                model_id,
                concurrency: w[0].concurrency,
            });
        }
        let counts: BTreeSet<u32> = runs.iter().map(|r| r.request_count).collect();
        if counts.len() > 1 {
            return Err(DatasetError::MixedRequestCounts {
                model_id,
                counts: counts.into_iter().collect(),
            });
        }
        Ok(Self { model_id, runs })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn runs(&self) -> &[BenchmarkRun] {
        &self.runs
    }

    pub fn run_at(&self, concurrency: u32) -> Option<&BenchmarkRun> {
        self.runs.iter().find(|r| r.concurrency == concurrency)
    }

    pub fn into_runs(self) -> Vec<BenchmarkRun> {
        self.runs
    }
}

impl<'de> Deserialize<'de> for Sweep {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            model_id: String,
            runs: Vec<BenchmarkRun>,
        }
        let raw = Raw::deserialize(deserializer)?;
        Sweep::new(raw.model_id, raw.runs).map_err(serde::de::Error::custom)
    }
}

/// Sweeps plus the model cards needed to place them on the frontier.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub sweeps: Vec<Sweep>,
    #[serde(default)]
    pub model_cards: Vec<ModelCard>,
}

impl Dataset {
    pub fn card(&self, model_id: &str) -> Option<&ModelCard> {
        self.model_cards.iter().find(|c| c.model_id == model_id)
    }

    pub fn sweep(&self, model_id: &str) -> Option<&Sweep> {
        self.sweeps.iter().find(|s| s.model_id == model_id)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("{} invalid row(s): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<RowViolation>),
    #[error("duplicate run for model `{model_id}` at concurrency {concurrency}")]
    DuplicateRun { model_id: String, concurrency: u32 },
    #[error("duplicate model card for `{0}`")]
    DuplicateCard(String),
    #[error("sweep `{model_id}` mixes request counts {counts:?}")]
    MixedRequestCounts { model_id: String, counts: Vec<u32> },
    #[error("unknown format `{0}` (expected csv or json)")]
    UnknownFormat(String),
    #[error(transparent)]
    Cost(#[from] CostError),
}

fn join_violations(v: &[RowViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Published-versus-recomputed cost of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCheck {
    pub concurrency: u32,
    pub published_usd: f64,
    pub recomputed_usd: f64,
    pub abs_diff_usd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecomputedSweep {
    /// The sweep with `cost_usd` replaced by the recomputed value.
    pub sweep: Sweep,
    /// One entry per run that carried a published cost.
    pub checks: Vec<CostCheck>,
}

/// Reprices every run of `sweep` at `hourly_usd`, keeping an audit of how far
/// each recomputed cost lies from the published one.
pub fn recompute_costs(sweep: &Sweep, hourly_usd: f64) -> Result<RecomputedSweep, DatasetError> {
    if !(hourly_usd.is_finite() && hourly_usd > 0.0) {
        return Err(CostError::Invalid {
            field: "hourly_usd",
            value: hourly_usd,
            expected: "finite and > 0",
        }
        .into());
    }
    let mut checks = Vec::new();
    let mut runs = Vec::with_capacity(sweep.runs.len());
    for run in &sweep.runs {
        let recomputed = cost_model::run_cost(hourly_usd, run.total_time_s)?;
        if let Some(published) = run.cost_usd {
            checks.push(CostCheck {
                concurrency: run.concurrency,
                published_usd: published,
                recomputed_usd: recomputed,
                abs_diff_usd: (published - recomputed).abs(),
            });
        }
        runs.push(BenchmarkRun {
            cost_usd: Some(recomputed),
            ..run.clone()
        });
    }
    Ok(RecomputedSweep {
        sweep: Sweep {
            model_id: sweep.model_id.clone(),
            runs,
        },
        checks,
    })
}

/// Maps the long identifiers used in some source tables onto the short model
/// names used everywhere else, so runs and model cards join on one key.
pub fn normalize_model_id(raw: &str) -> String {
    let trimmed = raw.trim();
    match trimmed {
        "gpt-oss-20b-low" => "gpt-oss-20b".to_string(),
        "GLM-4-32B-0414" => "GLM-4-32B".to_string(),
        "Qwen3-30B-A3B-Instruct-2507" => "Qwen3-30B".to_string(),
        other => other.to_string(),
    }
}
