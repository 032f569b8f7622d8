//! Comparison tables and the cost-quality bubble chart.

mod plot;

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost_model::round_cents;
use crate::dataset::ModelCard;
use crate::selection::{PerfThresholds, SelectionError, WhatIfResult};

pub use plot::{render_frontier_plot, PlotOptions};

/// Informal "sweet spot" cost band used to annotate reports, USD.
pub const DEFAULT_SWEET_SPOT_USD: f64 = 1.40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("unknown format `{0}` (expected markdown, csv or json)")]
    UnknownFormat(String),
    #[error("nothing to plot")]
    EmptyPlot,
    #[error("invalid plot option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

/// One model at its chosen configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_id: String,
    pub params_billion: f64,
    pub concurrency: u32,
    pub total_time_s: f64,
    pub avg_ttft_s: f64,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub total_tokens: u64,
    pub avg_throughput_tok_s: f64,
    /// Unrounded; tables display two decimals.
    pub cost_usd: f64,
    pub quality_score: f64,
    pub on_frontier: bool,
    pub in_sweet_spot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub hourly_rate_usd: f64,
    pub thresholds: PerfThresholds,
    pub dataset: String,
    pub generated_at: String,
    pub sweet_spot_usd: f64,
    /// Models with no configuration meeting the thresholds.
    pub infeasible_models: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Sorted by quality score, best first.
    pub rows: Vec<ComparisonRow>,
    pub metadata: ReportMetadata,
}

impl ComparisonReport {
    /// Builds the report from an evaluation. `generated_at` is passed in so
    /// rendering stays a pure function of its inputs.
    pub fn from_result(
        result: &WhatIfResult,
        cards: &[ModelCard],
        dataset: &str,
        generated_at: &str,
        sweet_spot_usd: f64,
    ) -> Result<Self, ReportError> {
        let mut rows = Vec::new();
        let mut infeasible = Vec::new();
        for choice in &result.optima {
            let (Some(run), Some(cost)) = (&choice.run, choice.cost_usd) else {
                infeasible.push(choice.model_id.clone());
                continue;
            };
            let card = cards
                .iter()
                .find(|c| c.model_id == choice.model_id)
                .ok_or_else(|| SelectionError::MissingScore(choice.model_id.clone()))?;
            rows.push(ComparisonRow {
                model_id: choice.model_id.clone(),
                params_billion: card.params_billion,
                concurrency: run.concurrency,
                total_time_s: run.total_time_s,
                avg_ttft_s: run.avg_ttft_s,
                input_tokens: run.input_tokens,
                output_tokens: run.output_tokens,
                total_tokens: run.total_tokens,
                avg_throughput_tok_s: run.avg_throughput_tok_s,
                cost_usd: cost,
                quality_score: card.quality_score,
                on_frontier: result.frontier.contains(&choice.model_id),
                in_sweet_spot: cost < sweet_spot_usd,
            });
        }
        rows.sort_by(|a, b| {
            b.quality_score
                .total_cmp(&a.quality_score)
                .then_with(|| a.model_id.cmp(&b.model_id))
        });
        Ok(Self {
            rows,
            metadata: ReportMetadata {
                hourly_rate_usd: result.hourly_rate_usd,
                thresholds: result.thresholds,
                dataset: dataset.to_string(),
                generated_at: generated_at.to_string(),
                sweet_spot_usd,
                infeasible_models: infeasible,
            },
        })
    }
}

const MARKDOWN_HEADER: [&str; 12] = [
    "Model",
    "Params (B)",
    "Conc.",
    "Total Time (s)",
    "Avg. TTFT (s)",
    "Input Tokens",
    "Output Tokens",
    "Total Tokens",
    "Throughput (tok/s)",
    "Cost ($)",
    "Score",
    "Frontier",
];

const CSV_HEADER: [&str; 13] = [
    "model_id",
    "params_billion",
    "concurrency",
    "total_time_s",
    "avg_ttft_s",
    "input_tokens",
    "output_tokens",
    "total_tokens",
    "avg_throughput_tok_s",
    "cost_usd",
    "quality_score",
    "on_frontier",
    "in_sweet_spot",
];

fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn markdown(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", MARKDOWN_HEADER.join(" | "));
    let _ = writeln!(
        out,
        "|{}",
        MARKDOWN_HEADER
            .iter()
            .enumerate()
            .map(|(i, _)| if i == 0 { "---|" } else { "---:|" })
            .collect::<String>()
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {:.2} | {:.3} | {} | {} | {} | {:.2} | {:.2} | {:.1} | {} |",
            r.model_id,
            r.params_billion,
            r.concurrency,
            r.total_time_s,
            r.avg_ttft_s,
            thousands(r.input_tokens),
            thousands(r.output_tokens),
            thousands(r.total_tokens),
            r.avg_throughput_tok_s,
            round_cents(r.cost_usd),
            r.quality_score,
            if r.on_frontier { "yes" } else { "" },
        );
    }
    out
}

fn csv_table(report: &ComparisonReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in &report.rows {
        w.write_record([
            r.model_id.clone(),
            r.params_billion.to_string(),
            r.concurrency.to_string(),
            r.total_time_s.to_string(),
            r.avg_ttft_s.to_string(),
            r.input_tokens.to_string(),
            r.output_tokens.to_string(),
            r.total_tokens.to_string(),
            r.avg_throughput_tok_s.to_string(),
            r.cost_usd.to_string(),
            r.quality_score.to_string(),
            r.on_frontier.to_string(),
            r.in_sweet_spot.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

/// Renders the report. Output is byte-stable for identical input.
pub fn render_table(report: &ComparisonReport, format: TableFormat) -> String {
    match format {
        TableFormat::Markdown => markdown(report),
        TableFormat::Csv => csv_table(report),
        TableFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::canonical_fixture;
    use crate::selection::evaluate;

    fn fixture_report() -> ComparisonReport {
        let (sweeps, cards) = canonical_fixture();
        let result = evaluate(&sweeps, &cards, 1.58, &PerfThresholds::default()).unwrap();
        ComparisonReport::from_result(&result, &cards, "wineval3", "2025-01-01T00:00:00Z", DEFAULT_SWEET_SPOT_USD)
            .unwrap()
    }

    #[test]
    fn first_row_is_best_model() {
        let report = fixture_report();
        assert_eq!(report.rows.len(), 9);
        let first = &report.rows[0];
        assert_eq!(first.model_id, "WiNGPT-3.5");
        assert_eq!(first.quality_score, 76.2);
        assert_eq!(round_cents(first.cost_usd), 0.34);
        assert!(first.on_frontier);
        let md = render_table(&report, TableFormat::Markdown);
        let line = md.lines().nth(2).unwrap();
        assert_eq!(
            line,
            "| WiNGPT-3.5 | 30 | 48 | 774.11 | 0.147 | 1,347,535 | 796,836 | 2,144,371 | 21.45 | 0.34 | 76.2 | yes |"
        );
        assert!(md.lines().any(|l| l.starts_with("| WiNGPT-3.0 |") && l.contains("| 3.47 |")));
        // WiNGPT-3.0 is the only model outside the sweet spot.
        let outside: Vec<&str> = report
            .rows
            .iter()
            .filter(|r| !r.in_sweet_spot)
            .map(|r| r.model_id.as_str())
            .collect();
        assert_eq!(outside, ["WiNGPT-3.0"]);
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut report = fixture_report();
        report.rows.clear();
        assert_eq!(render_table(&report, TableFormat::Markdown).lines().count(), 2);
        assert_eq!(render_table(&report, TableFormat::Csv).lines().count(), 1);
    }

    #[test]
    fn json_round_trip_and_stability() {
        let report = fixture_report();
        let doc = render_table(&report, TableFormat::Json);
        let back: ComparisonReport = serde_json::from_str(&doc).unwrap();
        assert_eq!(back, report);
        assert_eq!(doc, render_table(&fixture_report(), TableFormat::Json));
        let csv = render_table(&report, TableFormat::Csv);
        assert_eq!(csv, render_table(&fixture_report(), TableFormat::Csv));
    }

    #[test]
    fn unknown_format() {
        assert_eq!(
            "xml".parse::<TableFormat>().unwrap_err(),
            ReportError::UnknownFormat("xml".into())
        );
        assert_eq!("MD".parse::<TableFormat>().unwrap(), TableFormat::Markdown);
    }

    #[test]
    fn thousands_separator() {
        assert_eq!(thousands(0), "0");
        assert_eq!(thousands(999), "999");
        assert_eq!(thousands(1000), "1,000");
        assert_eq!(thousands(4_787_928), "4,787,928");
    }
}
