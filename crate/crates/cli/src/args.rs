use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "inferonomics", version, about = "LLM inference cost, concurrency and frontier analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hourly cost of a GPU (and a cluster of them) from hardware parameters.
    Cost(CostCmd),
    /// Check a run file (and optional scores) and report what it contains.
    Validate(ValidateCmd),
    /// Optimal concurrency per model under the thresholds.
    Select(SelectCmd),
    /// Cost-quality frontier over each model's optimal configuration.
    Frontier(FrontierCmd),
    /// Re-run selection and the frontier for new hardware assumptions.
    Whatif(WhatIfCmd),
    /// Comparison table of the optimal configurations.
    Report(ReportCmd),
    /// Level-to-level deltas and the point where more concurrency stops paying off.
    Scaling(ScalingCmd),
    /// Measure a concurrency sweep against an OpenAI-compatible endpoint.
    Sweep(SweepCmd),
    /// Serve the JSON API and the what-if explorer.
    Serve(ServeCmd),
    /// Run the scripted streaming mock endpoint.
    MockServer(MockCmd),
    /// Write the embedded reference dataset to files.
    ExportFixture(ExportCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    A800Baseline,
}

/// Hardware parameters: a preset or file, with individual flags on top.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Start from a bundled parameter set.
    #[arg(long, value_enum, conflicts_with = "params")]
    pub preset: Option<Preset>,
    /// Cost parameter file (JSON or TOML).
    #[arg(long, visible_alias = "cost-params", value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Purchase price per card, CNY.
    #[arg(long, allow_negative_numbers = true)]
    pub price: Option<f64>,
    /// Depreciation period, years.
    #[arg(long, allow_negative_numbers = true)]
    pub years: Option<f64>,
    /// Utilization in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub utilization: Option<f64>,
    /// Average power draw per card, kW.
    #[arg(long, allow_negative_numbers = true)]
    pub power_kw: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub pue: Option<f64>,
    /// Electricity price, CNY/kWh.
    #[arg(long, allow_negative_numbers = true)]
    pub electricity: Option<f64>,
    /// Annual maintenance as a fraction of the price.
    #[arg(long, allow_negative_numbers = true)]
    pub maintenance: Option<f64>,
    /// CNY per USD.
    #[arg(long, allow_negative_numbers = true)]
    pub fx: Option<f64>,
}

impl ParamArgs {
    pub fn any_set(&self) -> bool {
        self.preset.is_some()
            || self.params.is_some()
            || [
                self.price,
                self.years,
                self.utilization,
                self.power_kw,
                self.pue,
                self.electricity,
                self.maintenance,
                self.fx,
            ]
            .iter()
            .any(Option::is_some)
    }
}

/// Where runs and quality scores come from.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Use the embedded reference dataset (the default without --runs).
    #[arg(long, conflicts_with = "runs")]
    pub fixture: bool,
    /// Run file, CSV or JSON.
    #[arg(long, value_name = "FILE")]
    pub runs: Option<PathBuf>,
    /// Model cards (model_id, params_billion, quality_score), CSV or JSON.
    #[arg(long, value_name = "FILE")]
    pub scores: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    /// Average TTFT must be below this, seconds.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub max_ttft: f64,
    /// Average per-request throughput must exceed this, tokens/s.
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub min_throughput: f64,
}

/// Hourly rate used to price runs. Defaults to the published 1.58 USD/hour
/// for two cards unless a rate or hardware parameters are given.
#[derive(Debug, Clone, Args)]
pub struct RateArgs {
    /// Cluster rate in USD/hour.
    #[arg(long, allow_negative_numbers = true)]
    pub hourly_rate: Option<f64>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Cards per deployment.
    #[arg(long, default_value_t = 2)]
    pub gpus: u32,
}

#[derive(Debug, Args)]
pub struct CostCmd {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 1)]
    pub gpus: u32,
    /// Cloud price for the same number of cards, USD/hour; adds the
    /// break-even utilization.
    #[arg(long, allow_negative_numbers = true)]
    pub cloud_rate: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    pub format: OutFormat,
}

#[derive(Debug, Args)]
pub struct ValidateCmd {
    #[command(flatten)]
    pub data: DataArgs,
    /// Compare published costs against this rate.
    #[arg(long)]
    pub check_costs: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SelectCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    pub rate: RateArgs,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    pub format: OutFormat,
}

#[derive(Debug, Args)]
pub struct FrontierCmd {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output of `select --format json` (`-` for stdin) instead of selecting
    /// again.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["runs", "fixture"])]
    pub optima: Option<PathBuf>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    pub rate: RateArgs,
    /// Write the bubble chart as SVG.
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
    /// Logarithmic cost axis in the plot.
    #[arg(long)]
    pub log_x: bool,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    pub format: OutFormat,
}

#[derive(Debug, Args)]
pub struct WhatIfCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Price runs at this rate instead of deriving it from the parameters.
    #[arg(long, allow_negative_numbers = true)]
    pub hourly_rate: Option<f64>,
    /// Hardware parameters; the reference A800 set when omitted.
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 2)]
    pub gpus: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    pub rate: RateArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Markdown)]
    pub format: ReportFormat,
    /// Also write the frontier chart.
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub log_x: bool,
    /// Cost below which a configuration counts as affordable, USD.
    #[arg(long, default_value_t = inferonomics_core::reporting::DEFAULT_SWEET_SPOT_USD)]
    pub sweet_spot: f64,
    /// Timestamp recorded in the report; now when omitted.
    #[arg(long)]
    pub generated_at: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScalingCmd {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[command(flatten)]
    pub rate: RateArgs,
    /// Only this model.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    pub format: OutFormat,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    /// Base URL such as http://localhost:8000/v1.
    #[arg(long)]
    pub endpoint: String,
    /// Model name sent to the endpoint.
    #[arg(long)]
    pub model: String,
    /// Identifier written to the run file; the normalized model name by default.
    #[arg(long)]
    pub model_id: Option<String>,
    /// Workload JSON: {"name", "requests": [{"messages", "max_tokens"?}]}.
    #[arg(long, value_name = "FILE", required_unless_present = "synthetic")]
    pub workload: Option<PathBuf>,
    /// Use N copies of --prompt instead of a workload file.
    #[arg(long, value_name = "N", conflicts_with = "workload")]
    pub synthetic: Option<usize>,
    #[arg(long, default_value = "Summarize the benefits of regular exercise.")]
    pub prompt: String,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub levels: Vec<u32>,
    #[arg(long, default_value_t = 600.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = 8)]
    pub warmup: usize,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "OPENAI_API_KEY")]
    pub api_key_env: String,
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
    /// Run file to write; format from the extension (.csv or .json).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// JSONL trace log; `<out>.traces.jsonl` by default.
    #[arg(long, value_name = "FILE")]
    pub trace_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeCmd {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: String,
    #[command(flatten)]
    pub data: DataArgs,
    /// Directory with the built UI bundle.
    #[arg(long, value_name = "DIR")]
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MockCmd {
    #[arg(long, default_value = "127.0.0.1:0")]
    pub listen: SocketAddr,
    #[arg(long, default_value_t = 50)]
    pub ttft_ms: u64,
    #[arg(long, default_value_t = 10)]
    pub gap_ms: u64,
    #[arg(long, default_value_t = 16)]
    pub tokens: u32,
    #[arg(long, default_value_t = 32)]
    pub prompt_tokens: u32,
    /// Never send a usage chunk.
    #[arg(long)]
    pub no_usage: bool,
    /// Require the key held in this environment variable.
    #[arg(long)]
    pub api_key_env: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExportCmd {
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}
