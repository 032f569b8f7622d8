use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use inferonomics_bench::mock::MockScript;
use inferonomics_bench::{run_sweep, write_trace_log, RunConfig, WorkloadSpec};
use inferonomics_core::cost_model::{
    break_even_utilization, hourly_breakdown, round_cents, GpuCostParams, HourlyCostBreakdown,
};
use inferonomics_core::dataset::{
    canonical_dataset, recompute_costs, write_model_cards, write_runs, Format, FIXTURE_DATASET_ID,
};
use inferonomics_core::reporting::{render_frontier_plot, render_table, ComparisonReport, PlotOptions, TableFormat};
use inferonomics_core::selection::{
    evaluate, pareto_frontier, scaling_analysis, select_optimal, what_if, ScalingAnalysis,
};
use inferonomics_core::{Frontier, ModelCard, OptimalChoice, ParetoPoint, PerfThresholds, SelectionError};
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::error::CliError;
use crate::inputs;

// A reader that stops early (`| head`) is not an error.
fn stdout_result(r: std::io::Result<()>) -> Result<(), CliError> {
    match r {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("stdout", e)),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    let text = serde_json::to_string_pretty(value).expect("output serializes");
    stdout_result(writeln!(out, "{text}"))
}

/// One compact line so callers can read the bound address before the server
/// blocks.
fn announce(url: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::json!({ "listening": url }))
        .and_then(|()| out.flush())
        .map_err(|e| CliError::io("stdout", e))
}

fn print_text(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    stdout_result(out.write_all(text.as_bytes()))
}

#[derive(Debug, Serialize)]
struct CloudComparison {
    cloud_usd_hr: f64,
    /// Base rate at full utilization over the cloud rate; above 1 means
    /// self-hosting never breaks even.
    break_even_utilization: f64,
}

#[derive(Debug, Serialize)]
struct CostOutput {
    params: GpuCostParams,
    /// One card at the given utilization.
    breakdown: HourlyCostBreakdown,
    gpu_count: u32,
    cluster_usd_hr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cloud: Option<CloudComparison>,
}

pub fn cost(cmd: CostCmd) -> Result<(), CliError> {
    let params = inputs::cost_params(&cmd.params)?;
    let breakdown = hourly_breakdown(&params)?;
    let cluster = inferonomics_core::cost_model::cluster_rate(breakdown.total_usd_hr, cmd.gpus)?;
    let cloud = match cmd.cloud_rate {
        Some(rate) => {
            let base = hourly_breakdown(&GpuCostParams {
                utilization: 1.0,
                ..params
            })?;
            Some(CloudComparison {
                cloud_usd_hr: rate,
                break_even_utilization: break_even_utilization(base.total_usd_hr * f64::from(cmd.gpus), rate)?,
            })
        }
        None => None,
    };
    let out = CostOutput {
        params,
        breakdown,
        gpu_count: cmd.gpus,
        cluster_usd_hr: cluster,
        cloud,
    };
    match cmd.format {
        OutFormat::Json => print_json(&out),
        OutFormat::Table => {
            let b = &out.breakdown;
            let mut s = String::new();
            for (label, v) in [
                ("depreciation", b.depreciation_usd_hr),
                ("power", b.power_usd_hr),
                ("maintenance", b.maintenance_usd_hr),
                ("total", b.total_usd_hr),
            ] {
                s.push_str(&format!("{label:<14}{v:>10.4} USD/hr  ({:.2})\n", round_cents(v)));
            }
            s.push_str(&format!(
                "{:<14}{:>10.4} USD/hr  ({:.2})\n",
                format!("x{} cards", out.gpu_count),
                out.cluster_usd_hr,
                round_cents(out.cluster_usd_hr)
            ));
            if let Some(c) = &out.cloud {
                s.push_str(&format!(
                    "break-even utilization vs {:.2} USD/hr cloud: {:.3}\n",
                    c.cloud_usd_hr, c.break_even_utilization
                ));
            }
            print_text(&s)
        }
    }
}

#[derive(Debug, Serialize)]
struct ModelSummary {
    model_id: String,
    levels: Vec<u32>,
    request_count: Option<u32>,
    has_score: bool,
}

#[derive(Debug, Serialize)]
struct CostAudit {
    hourly_rate_usd: f64,
    runs_checked: usize,
    max_abs_diff_usd: f64,
}

#[derive(Debug, Serialize)]
struct ValidateOutput {
    dataset: String,
    runs: usize,
    models: Vec<ModelSummary>,
    model_cards: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost_audit: Option<CostAudit>,
}

pub fn validate(cmd: ValidateCmd) -> Result<(), CliError> {
    let data = inputs::load(&cmd.data)?;
    let cost_audit = match cmd.check_costs {
        Some(rate) => {
            let mut checked = 0;
            let mut worst = 0.0f64;
            for sweep in &data.sweeps {
                for c in recompute_costs(sweep, rate)?.checks {
                    checked += 1;
                    worst = worst.max(c.abs_diff_usd);
                }
            }
            Some(CostAudit {
                hourly_rate_usd: rate,
                runs_checked: checked,
                max_abs_diff_usd: worst,
            })
        }
        None => None,
    };
    print_json(&ValidateOutput {
        dataset: data.name,
        runs: data.sweeps.iter().map(|s| s.runs().len()).sum(),
        models: data
            .sweeps
            .iter()
            .map(|s| ModelSummary {
                model_id: s.model_id().to_string(),
                levels: s.runs().iter().map(|r| r.concurrency).collect(),
                request_count: s.runs().first().map(|r| r.request_count),
                has_score: data.cards.iter().any(|c| c.model_id == s.model_id()),
            })
            .collect(),
        model_cards: data.cards.len(),
        cost_audit,
    })
}

/// `select --format json` output, also accepted by `frontier --optima`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectOutput {
    pub hourly_rate_usd: f64,
    pub thresholds: PerfThresholds,
    pub optima: Vec<OptimalChoice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierOutput {
    pub frontier: Frontier,
}

fn select_all(
    sweeps: &[inferonomics_core::Sweep],
    thresholds: &PerfThresholds,
    hourly: f64,
) -> Result<Vec<OptimalChoice>, CliError> {
    Ok(sweeps
        .iter()
        .map(|s| select_optimal(s, thresholds, hourly))
        .collect::<Result<_, _>>()?)
}

fn optima_table(optima: &[OptimalChoice]) -> String {
    let mut s = format!(
        "{:<16} {:>6} {:>12} {:>9} {:>11} {:>9}\n",
        "model", "conc", "time_s", "ttft_s", "tok/s", "cost_usd"
    );
    for c in optima {
        match (&c.run, c.cost_usd) {
            (Some(r), Some(cost)) => s.push_str(&format!(
                "{:<16} {:>6} {:>12.2} {:>9.3} {:>11.2} {:>9.2}\n",
                c.model_id,
                r.concurrency,
                r.total_time_s,
                r.avg_ttft_s,
                r.avg_throughput_tok_s,
                round_cents(cost)
            )),
            _ => s.push_str(&format!("{:<16} infeasible at every level\n", c.model_id)),
        }
    }
    s
}

pub fn select(cmd: SelectCmd) -> Result<(), CliError> {
    let data = inputs::load(&cmd.data)?;
    let thresholds = inputs::thresholds(&cmd.thresholds)?;
    let hourly = inputs::hourly_rate(&cmd.rate)?;
    let optima = select_all(&data.sweeps, &thresholds, hourly)?;
    for c in optima.iter().filter(|c| !c.feasible) {
        eprintln!("warning: {} has no configuration meeting the thresholds", c.model_id);
    }
    match cmd.format {
        OutFormat::Json => print_json(&SelectOutput {
            hourly_rate_usd: hourly,
            thresholds,
            optima,
        }),
        OutFormat::Table => print_text(&optima_table(&optima)),
    }
}

/// Places each feasible optimum at (cost, score) and keeps the undominated
/// ones. Every model needs a card, feasible or not.
fn frontier_of(optima: &[OptimalChoice], cards: &[ModelCard]) -> Result<Frontier, CliError> {
    let card = |id: &str| {
        cards
            .iter()
            .find(|c| c.model_id == id)
            .ok_or_else(|| SelectionError::MissingScore(id.to_string()))
    };
    let mut points = Vec::new();
    for choice in optima {
        let c = card(&choice.model_id)?;
        if let (true, Some(cost)) = (choice.feasible, choice.cost_usd) {
            points.push(ParetoPoint {
                model_id: choice.model_id.clone(),
                cost_usd: cost,
                quality: c.quality_score,
                params_billion: c.params_billion,
            });
        }
    }
    if points.is_empty() {
        return Ok(Frontier {
            points: Vec::new(),
            dominated: Vec::new(),
        });
    }
    Ok(pareto_frontier(&points)?)
}

fn write_plot(frontier: &Frontier, path: &Path, log_x: bool) -> Result<(), CliError> {
    let svg = render_frontier_plot(
        frontier,
        &PlotOptions {
            log_x,
            ..PlotOptions::default()
        },
    )?;
    inputs::write_text(path, &svg)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn frontier(cmd: FrontierCmd) -> Result<(), CliError> {
    let (optima, cards) = match &cmd.optima {
        Some(path) => {
            let selected: SelectOutput = serde_json::from_str(&inputs::read_text(path)?)
                .map_err(|e| CliError::Validation(format!("{}: not a select output: {e}", path.display())))?;
            let cards = match &cmd.data.scores {
                Some(p) => inputs::scores(p)?,
                None => canonical_dataset().model_cards,
            };
            (selected.optima, cards)
        }
        None => {
            let data = inputs::load(&cmd.data)?;
            let thresholds = inputs::thresholds(&cmd.thresholds)?;
            let hourly = inputs::hourly_rate(&cmd.rate)?;
            (select_all(&data.sweeps, &thresholds, hourly)?, data.cards)
        }
    };
    let frontier = frontier_of(&optima, &cards)?;
    if let Some(path) = &cmd.plot {
        write_plot(&frontier, path, cmd.log_x)?;
    }
    match cmd.format {
        OutFormat::Json => print_json(&FrontierOutput { frontier }),
        OutFormat::Table => {
            let mut s = String::new();
            for p in &frontier.points {
                s.push_str(&format!("{:<16} {:>8.2} {:>6.1}  frontier\n", p.model_id, round_cents(p.cost_usd), p.quality));
            }
            for d in &frontier.dominated {
                s.push_str(&format!(
                    "{:<16} {:>8.2} {:>6.1}  dominated by {}\n",
                    d.point.model_id,
                    round_cents(d.point.cost_usd),
                    d.point.quality,
                    d.dominated_by
                ));
            }
            print_text(&s)
        }
    }
}

pub fn whatif(cmd: WhatIfCmd) -> Result<(), CliError> {
    let data = inputs::load(&cmd.data)?;
    let thresholds = inputs::thresholds(&cmd.thresholds)?;
    let result = match cmd.hourly_rate {
        Some(rate) => {
            if cmd.params.any_set() {
                return Err(CliError::Validation(
                    "--hourly-rate cannot be combined with cost parameters".into(),
                ));
            }
            evaluate(&data.sweeps, &data.cards, inputs::explicit_rate(rate)?, &thresholds)?
        }
        None => what_if(
            &data.sweeps,
            &data.cards,
            &inputs::cost_params(&cmd.params)?,
            cmd.gpus,
            &thresholds,
        )?,
    };
    print_json(&result)
}

pub fn report(cmd: ReportCmd) -> Result<(), CliError> {
    let data = inputs::load(&cmd.data)?;
    let thresholds = inputs::thresholds(&cmd.thresholds)?;
    let hourly = inputs::hourly_rate(&cmd.rate)?;
    let result = evaluate(&data.sweeps, &data.cards, hourly, &thresholds)?;
    let generated_at = cmd
        .generated_at
        .clone()
        .unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let report = ComparisonReport::from_result(&result, &data.cards, &data.name, &generated_at, cmd.sweet_spot)?;
    if let Some(path) = &cmd.plot {
        let svg = render_frontier_plot(
            &result.frontier,
            &PlotOptions {
                log_x: cmd.log_x,
                sweet_spot_usd: Some(cmd.sweet_spot),
                ..PlotOptions::default()
            },
        )?;
        inputs::write_text(path, &svg)?;
        eprintln!("wrote {}", path.display());
    }
    let format = match cmd.format {
        ReportFormat::Markdown => TableFormat::Markdown,
        ReportFormat::Csv => TableFormat::Csv,
        ReportFormat::Json => TableFormat::Json,
    };
    print_text(&render_table(&report, format))
}

pub fn scaling(cmd: ScalingCmd) -> Result<(), CliError> {
    let data = inputs::load(&cmd.data)?;
    let thresholds = inputs::thresholds(&cmd.thresholds)?;
    let hourly = inputs::hourly_rate(&cmd.rate)?;
    let mut analyses: Vec<ScalingAnalysis> = Vec::new();
    match &cmd.model {
        Some(id) => {
            let sweep = data
                .sweeps
                .iter()
                .find(|s| s.model_id() == id)
                .ok_or_else(|| CliError::Validation(format!("no runs for model `{id}`")))?;
            analyses.push(scaling_analysis(sweep, &thresholds, hourly)?);
        }
        None => {
            for sweep in &data.sweeps {
                match scaling_analysis(sweep, &thresholds, hourly) {
                    Ok(a) => analyses.push(a),
                    Err(SelectionError::TooFewRuns { model_id, runs }) => {
                        eprintln!("warning: skipping {model_id}: {runs} run(s)")
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    match cmd.format {
        OutFormat::Json => print_json(&analyses),
        OutFormat::Table => {
            let mut s = String::new();
            for a in &analyses {
                s.push_str(&format!("{}\n", a.model_id));
                for st in &a.steps {
                    s.push_str(&format!(
                        "  {:>4} -> {:<4} time {:>+10.2}s  tok/s {:>+8.2}  ttft {:>+8.3}s  cost {:>+7.2}{}\n",
                        st.from_conc,
                        st.to_conc,
                        st.delta_total_time_s,
                        st.delta_avg_throughput,
                        st.delta_avg_ttft,
                        st.marginal_cost_change,
                        if st.past_knee { "  past knee" } else { "" }
                    ));
                }
            }
            print_text(&s)
        }
    }
}

pub async fn sweep(cmd: SweepCmd) -> Result<(), CliError> {
    let workload = match (&cmd.workload, cmd.synthetic) {
        (Some(path), _) => WorkloadSpec::from_json(&inputs::read_text(path)?)?,
        (None, Some(n)) => WorkloadSpec::repeated("synthetic", &cmd.prompt, n, cmd.max_tokens),
        (None, None) => return Err(CliError::Validation("--workload or --synthetic is required".into())),
    };
    let config = RunConfig {
        endpoint_url: cmd.endpoint.clone(),
        model_name: cmd.model.clone(),
        model_id: cmd.model_id.clone(),
        concurrency_levels: cmd.levels.clone(),
        request_timeout_s: cmd.timeout,
        warmup_requests: cmd.warmup,
        api_key_env: Some(cmd.api_key_env.clone()),
        shuffle_seed: cmd.shuffle_seed,
    };
    config.validate()?;
    workload.validate()?;

    let report = run_sweep(&config, &workload).await?;
    let trace_path = cmd
        .trace_log
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.traces.jsonl", cmd.out.display())));
    let file = std::fs::File::create(&trace_path).map_err(|e| CliError::io(trace_path.display(), e))?;
    write_trace_log(std::io::BufWriter::new(file), &report.traces)
        .map_err(|e| CliError::io(trace_path.display(), e))?;
    for level in report.levels.iter().filter(|l| !l.included) {
        eprintln!(
            "warning: concurrency {} omitted: {}",
            level.concurrency,
            level.diagnostic.as_deref().unwrap_or("failed")
        );
    }
    if report.sweep.runs().is_empty() {
        return Err(CliError::Io(format!(
            "no concurrency level completed without errors against {}",
            config.chat_completions_url()
        )));
    }
    let text = write_runs(std::slice::from_ref(&report.sweep), Format::from_path(&cmd.out));
    inputs::write_text(&cmd.out, &text)?;
    eprintln!("wrote {} and {}", cmd.out.display(), trace_path.display());
    print_json(&report)
}

pub async fn serve(cmd: ServeCmd) -> Result<(), CliError> {
    let local = match &cmd.data.runs {
        Some(_) => {
            let data = inputs::load(&cmd.data)?;
            Some(inferonomics_core::Dataset {
                sweeps: data.sweeps,
                model_cards: data.cards,
            })
        }
        None => None,
    };
    let listener = tokio::net::TcpListener::bind(cmd.listen.as_str())
        .await
        .map_err(|e| CliError::io(format!("cannot listen on {}", cmd.listen), e))?;
    let addr = listener.local_addr().map_err(|e| CliError::io("listener", e))?;
    announce(&format!("http://{addr}"))?;
    let config = inferonomics_server::AppConfig {
        ui_dir: cmd.ui_dir.clone(),
        local_dataset: local,
    };
    inferonomics_server::serve(listener, config, shutdown_signal())
        .await
        .map_err(|e| CliError::io("server", e))
}

async fn shutdown_signal() {
    let _ = tokio::signal::ctrl_c().await;
}

pub async fn mock_server(cmd: MockCmd) -> Result<(), CliError> {
    let api_key = match &cmd.api_key_env {
        Some(var) => Some(
            std::env::var(var).map_err(|_| CliError::Validation(format!("environment variable {var} is not set")))?,
        ),
        None => None,
    };
    let script = MockScript {
        ttft: Duration::from_millis(cmd.ttft_ms),
        gap: Duration::from_millis(cmd.gap_ms),
        tokens: cmd.tokens,
        prompt_tokens: cmd.prompt_tokens,
        report_usage: !cmd.no_usage,
        api_key,
    };
    let listener = tokio::net::TcpListener::bind(cmd.listen)
        .await
        .map_err(|e| CliError::io(format!("cannot listen on {}", cmd.listen), e))?;
    let addr = listener.local_addr().map_err(|e| CliError::io("listener", e))?;
    announce(&format!("http://{addr}/v1"))?;
    inferonomics_bench::mock::serve(listener, script, shutdown_signal())
        .await
        .map_err(|e| CliError::io("mock server", e))
}

pub fn export_fixture(cmd: ExportCmd) -> Result<(), CliError> {
    let dataset = canonical_dataset();
    std::fs::create_dir_all(&cmd.out_dir).map_err(|e| CliError::io(cmd.out_dir.display(), e))?;
    let files = [
        (format!("{FIXTURE_DATASET_ID}_runs.csv"), write_runs(&dataset.sweeps, Format::Csv)),
        (format!("{FIXTURE_DATASET_ID}_scores.csv"), write_model_cards(&dataset.model_cards, Format::Csv)),
        (
            format!("{FIXTURE_DATASET_ID}.json"),
            serde_json::to_string_pretty(&dataset).expect("dataset serializes") + "\n",
        ),
    ];
    let mut written = Vec::new();
    for (name, text) in files {
        let path = cmd.out_dir.join(&name);
        inputs::write_text(&path, &text)?;
        written.push(path.display().to_string());
    }
    print_json(&serde_json::json!({"written": written}))
}
