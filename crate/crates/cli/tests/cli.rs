mod common;

use std::collections::BTreeMap;

use common::{http, run, run_with_stdin, spawn};
use inferonomics_core::dataset::{canonical_dataset, write_model_cards, write_runs, Format};
use serde_json::Value;

fn optima_map(v: &Value) -> BTreeMap<String, Option<u64>> {
    v["optima"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["model_id"].as_str().unwrap().to_string(), c["concurrency"].as_u64()))
        .collect()
}

fn frontier_ids(v: &Value) -> Vec<String> {
    v["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["model_id"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn cost_baseline_zero_and_range_error() {
    let v = run(&["cost", "--preset", "a800-baseline"]).json();
    let total = v["breakdown"]["total_usd_hr"].as_f64().unwrap();
    assert!((0.78..=0.79).contains(&total), "{total}");

    let v = run(&["cost", "--price", "0", "--power-kw", "0"]).json();
    assert_eq!(v["breakdown"]["total_usd_hr"].as_f64(), Some(0.0));

    let out = run(&["cost", "--utilization", "1.5"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("utilization"));

    let v = run(&["cost", "--gpus", "2", "--cloud-rate", "5.08"]).json();
    let be = v["cloud"]["break_even_utilization"].as_f64().unwrap();
    assert!((be - v["cluster_usd_hr"].as_f64().unwrap() / 5.08).abs() < 1e-12);
}

#[test]
fn cost_params_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.toml");
    std::fs::write(
        &path,
        "purchase_price = 60000.0\ndepreciation_years = 3.0\nutilization = 1.0\navg_power_kw = 0.4\npue = 1.5\nelectricity_price = 1.0\nmaintenance_rate = 0.03\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let v = run(&["cost", "--params", p]).json();
    assert_eq!(v["params"]["fx_cny_per_usd"].as_f64(), Some(7.09));
    assert_eq!(v["params"]["purchase_price"].as_f64(), Some(60000.0));
    let v = run(&["cost", "--params", p, "--price", "120000"]).json();
    let baseline = run(&["cost"]).json();
    assert_eq!(v["breakdown"], baseline["breakdown"]);

    let out = run(&["cost", "--params", "/nonexistent/p.toml"]);
    assert_eq!(out.code, 2);
}

#[test]
fn select_fixture_and_vacuous_thresholds() {
    let v = run(&["select", "--fixture"]).json();
    assert_eq!(v["hourly_rate_usd"].as_f64(), Some(1.58));
    let m = optima_map(&v);
    let expected = [
        ("WiNGPT-2.7", 16),
        ("GLM-4-32B", 8),
        ("gpt-oss-20b", 64),
        ("WiNGPT-3.0", 16),
        ("Seed-OSS-36B", 16),
        ("medgemma-27b", 32),
        ("Mistral-Small", 64),
        ("Qwen3-30B", 64),
        ("WiNGPT-3.5", 48),
    ];
    assert_eq!(m.len(), 9);
    for (id, c) in expected {
        assert_eq!(m[id], Some(c), "{id}");
    }

    let v = run(&["select", "--fixture", "--min-throughput", "0.001", "--max-ttft", "1e9"]).json();
    let dataset = canonical_dataset();
    for sweep in &dataset.sweeps {
        let fastest = sweep
            .runs()
            .iter()
            .min_by(|a, b| a.total_time_s.total_cmp(&b.total_time_s))
            .unwrap();
        assert_eq!(optima_map(&v)[sweep.model_id()], Some(u64::from(fastest.concurrency)));
    }
}

#[test]
fn select_empty_run_file() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("empty.csv", ""), ("header.csv", "model_id,concurrency,request_count,total_time_s,avg_ttft_s,input_tokens,output_tokens,total_tokens,avg_throughput_tok_s\n"), ("empty.json", "[]")] {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let v = run(&["select", "--runs", path.to_str().unwrap()]).json();
        assert_eq!(v["optima"], Value::Array(vec![]), "{name}");
    }
}

#[test]
fn select_reports_row_errors_and_infeasibility() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(
        &path,
        "model_id,concurrency,request_count,total_time_s,avg_ttft_s,input_tokens,output_tokens,total_tokens,avg_throughput_tok_s\nm,8,10,100,0.2,5,5,11,30\n",
    )
    .unwrap();
    let out = run(&["select", "--runs", path.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("total_tokens"), "{}", out.stderr);

    let v = run(&["select", "--fixture", "--max-ttft", "0.01"]).json();
    assert!(v["optima"].as_array().unwrap().iter().all(|c| c["feasible"] == false));

    let out = run(&["select", "--fixture", "--max-ttft", "-1"]);
    assert_eq!(out.code, 1);
    let out = run(&["select", "--runs", "/nonexistent.csv"]);
    assert_eq!(out.code, 2);
}

#[test]
fn frontier_fixture_plot_and_missing_scores() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("f.svg");
    let v = run(&["frontier", "--fixture", "--plot", svg.to_str().unwrap()]).json();
    assert_eq!(frontier_ids(&v["frontier"]), ["gpt-oss-20b", "Mistral-Small", "Qwen3-30B", "WiNGPT-3.5"]);
    let plot = std::fs::read_to_string(&svg).unwrap();
    assert!(plot.starts_with("<svg") || plot.starts_with("<?xml"));
    assert_eq!(plot.matches("<circle").count(), 9);

    // Runs for one model and its score only.
    let dataset = canonical_dataset();
    let qwen: Vec<_> = dataset.sweeps.iter().filter(|s| s.model_id() == "Qwen3-30B").cloned().collect();
    let runs = dir.path().join("qwen.csv");
    std::fs::write(&runs, write_runs(&qwen, Format::Csv)).unwrap();
    let scores = dir.path().join("scores.csv");
    std::fs::write(&scores, write_model_cards(&dataset.model_cards, Format::Csv)).unwrap();
    let v = run(&["frontier", "--runs", runs.to_str().unwrap(), "--scores", scores.to_str().unwrap()]).json();
    assert_eq!(frontier_ids(&v["frontier"]), ["Qwen3-30B"]);

    let others: Vec<_> = dataset.model_cards.iter().filter(|c| c.model_id != "Qwen3-30B").cloned().collect();
    std::fs::write(&scores, write_model_cards(&others, Format::Csv)).unwrap();
    let out = run(&["frontier", "--runs", runs.to_str().unwrap(), "--scores", scores.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("Qwen3-30B"));
}

#[test]
fn select_piped_into_frontier_equals_whatif() {
    for extra in [&[][..], &["--preset", "a800-baseline"][..], &["--min-throughput", "30"][..]] {
        let mut select = vec!["select", "--fixture"];
        select.extend_from_slice(extra);
        let sel = run(&select);
        let frontier = run_with_stdin(&["frontier", "--optima", "-"], &sel.stdout).json();
        let mut whatif = vec!["whatif", "--fixture"];
        whatif.extend_from_slice(extra);
        if extra.is_empty() || extra[0] == "--min-throughput" {
            whatif.extend_from_slice(&["--hourly-rate", "1.58"]);
        }
        let w = run(&whatif).json();
        let s = sel.json();
        assert_eq!(w["hourly_rate_usd"], s["hourly_rate_usd"]);
        assert_eq!(w["thresholds"], s["thresholds"]);
        assert_eq!(w["optima"], s["optima"]);
        assert_eq!(w["frontier"], frontier["frontier"]);
    }
}

#[test]
fn whatif_defaults_derive_the_rate() {
    let v = run(&["whatif"]).json();
    let rate = v["hourly_rate_usd"].as_f64().unwrap();
    assert!((2.0 * 0.78..=2.0 * 0.79).contains(&rate), "{rate}");
    let v30 = run(&["whatif", "--min-throughput", "30"]).json();
    let w27 = v30["optima"].as_array().unwrap().iter().find(|c| c["model_id"] == "WiNGPT-2.7").unwrap();
    assert_eq!(w27["concurrency"], 8);
    let out = run(&["whatif", "--gpus", "0"]);
    assert_eq!(out.code, 1);
    let out = run(&["whatif", "--hourly-rate", "1.58", "--price", "1"]);
    assert_eq!(out.code, 1);
}

#[test]
fn report_formats() {
    let out = run(&["report", "--generated-at", "2025-01-01T00:00:00Z"]);
    assert_eq!(out.code, 0);
    let line = out.stdout.lines().nth(2).unwrap();
    assert!(line.starts_with("| WiNGPT-3.5 | 30 | 48 | 774.11 |"), "{line}");
    assert_eq!(out.stdout, run(&["report", "--generated-at", "2025-01-01T00:00:00Z"]).stdout);

    let v = run(&["report", "--format", "json", "--generated-at", "x"]).json();
    assert_eq!(v["rows"].as_array().unwrap().len(), 9);
    assert_eq!(v["metadata"]["dataset"], "wineval3");
    let csv = run(&["report", "--format", "csv"]);
    assert_eq!(csv.stdout.lines().count(), 10);
}

#[test]
fn scaling_reports_knees() {
    let v = run(&["scaling", "--model", "WiNGPT-3.0"]).json();
    let a = &v[0];
    assert_eq!(a["knee"]["from_conc"], 16);
    assert_eq!(a["knee"]["to_conc"], 32);
    let last = a["steps"].as_array().unwrap().last().unwrap();
    assert_eq!(last["past_knee"], true);
    let all = run(&["scaling"]).json();
    assert_eq!(all.as_array().unwrap().len(), 9);
    assert_eq!(run(&["scaling", "--model", "nope"]).code, 1);
}

#[test]
fn validate_audits_published_costs() {
    let v = run(&["validate", "--fixture", "--check-costs", "1.58"]).json();
    assert_eq!(v["runs"], 54);
    assert_eq!(v["cost_audit"]["runs_checked"], 54);
    assert!(v["cost_audit"]["max_abs_diff_usd"].as_f64().unwrap() <= 0.01);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["select", "--bogus"]).code, 1);
    assert_eq!(run(&[]).code, 1);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn sweep_config_and_endpoint_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("runs.csv");
    let out = dir.path().join("runs.csv");
    let o = run(&[
        "sweep", "--endpoint", "http://127.0.0.1:9/v1", "--model", "m", "--synthetic", "2",
        "--levels", "8,8", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 1, "{}", o.stderr);

    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let endpoint = format!("http://127.0.0.1:{port}/v1");
    let o = run(&[
        "sweep", "--endpoint", &endpoint, "--model", "m", "--synthetic", "2", "--levels", "1",
        "--warmup", "0", "--timeout", "5", "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 2, "{}", o.stderr);
    assert!(!out_path.exists());
}

#[test]
fn sweep_against_mock_then_select() {
    let mock = spawn(&["mock-server", "--ttft-ms", "20", "--gap-ms", "2", "--tokens", "10"]);
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.json");
    let traces = dir.path().join("traces.jsonl");
    let out = run(&[
        "sweep", "--endpoint", &mock.url, "--model", "Qwen3-30B-A3B-Instruct-2507", "--synthetic", "12",
        "--levels", "1,2,4", "--warmup", "2", "--out", runs.to_str().unwrap(),
        "--trace-log", traces.to_str().unwrap(),
    ]);
    let summary = out.json();
    assert_eq!(summary["sweep"]["model_id"], "Qwen3-30B");
    assert_eq!(summary["levels"].as_array().unwrap().len(), 3);
    assert_eq!(std::fs::read_to_string(&traces).unwrap().lines().count(), 36);

    let v = run(&["select", "--runs", runs.to_str().unwrap()]).json();
    let choice = &v["optima"][0];
    assert_eq!(choice["model_id"], "Qwen3-30B");
    // 10 tokens at 2 ms gaps is far above 20 tok/s; TTFT is well below 1 s.
    assert_eq!(choice["feasible"], true);

    // The fixture's score file supplies the card.
    let v = run(&["frontier", "--runs", runs.to_str().unwrap(), "--scores", &format!("{}/../../data/wineval3_scores.csv", env!("CARGO_MANIFEST_DIR"))]).json();
    assert_eq!(frontier_ids(&v["frontier"]), ["Qwen3-30B"]);
}

#[test]
fn sweep_requires_credentials_when_the_endpoint_does() {
    let mock = spawn_with_env_key();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs.csv");
    let o = run(&[
        "sweep", "--endpoint", &mock.url, "--model", "m", "--synthetic", "2", "--levels", "1",
        "--warmup", "0", "--api-key-env", "INFERONOMICS_CLI_TEST_UNSET_KEY", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("401"), "{}", o.stderr);
}

fn spawn_with_env_key() -> common::Server {
    std::env::set_var("INFERONOMICS_CLI_TEST_MOCK_KEY", "k");
    spawn(&["mock-server", "--ttft-ms", "1", "--gap-ms", "1", "--tokens", "2", "--api-key-env", "INFERONOMICS_CLI_TEST_MOCK_KEY"])
}

#[test]
fn serve_fixture_endpoints() {
    let server = spawn(&["serve", "--listen", "127.0.0.1:0", "--fixture"]);
    let (status, body) = http(&server.url, "GET", "/healthz", None);
    assert_eq!(status, 200, "{body}");
    let (status, body) = http(&server.url, "GET", "/api/datasets/wineval3", None);
    assert_eq!(status, 200);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["sweeps"].as_array().unwrap().len(), 9);

    let (status, body) = http(&server.url, "POST", "/api/whatif", Some(r#"{"gpu_count":2}"#));
    assert_eq!(status, 200);
    let api: Value = serde_json::from_str(&body).unwrap();
    let cli = run(&["whatif"]).json();
    assert_eq!(api, cli);
    assert_eq!(optima_map(&api)["gpt-oss-20b"], Some(64));
}

#[test]
fn serve_bad_address() {
    assert_eq!(run(&["serve", "--listen", "not-an-address"]).code, 2);
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    assert_eq!(run(&["serve", "--listen", &addr]).code, 2);
}

#[test]
fn export_fixture_matches_published_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let v = run(&["export-fixture", "--out-dir", dir.path().to_str().unwrap()]).json();
    assert_eq!(v["written"].as_array().unwrap().len(), 3);
    for name in ["wineval3_runs.csv", "wineval3_scores.csv", "wineval3.json"] {
        let fresh = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let published = std::fs::read_to_string(format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap();
        assert_eq!(fresh, published, "{name} is stale; regenerate with export-fixture");
    }
    // The exported run file feeds back into selection unchanged.
    let runs = dir.path().join("wineval3_runs.csv");
    let scores = dir.path().join("wineval3_scores.csv");
    let a = run(&["whatif", "--runs", runs.to_str().unwrap(), "--scores", scores.to_str().unwrap()]).json();
    let b = run(&["whatif", "--fixture"]).json();
    assert_eq!(a, b);
    let c = run(&["whatif", "--runs", dir.path().join("wineval3.json").to_str().unwrap()]).json();
    assert_eq!(c, b);
}
