use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use inferonomics_core::cost_model::GpuCostParams;
use inferonomics_core::dataset::canonical_fixture;
use inferonomics_core::selection::{what_if, PerfThresholds, WhatIfResult};
use inferonomics_server::{app, AppConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(config: AppConfig, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app(config).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn post_json(uri: &str, body: Value) -> (StatusCode, Value) {
    let (s, b) = call(AppConfig::default(), "POST", uri, Some(body.to_string())).await;
    (s, serde_json::from_slice(&b).unwrap())
}

fn baseline_json() -> Value {
    serde_json::to_value(GpuCostParams::a800_baseline()).unwrap()
}

#[tokio::test]
async fn health() {
    let (s, b) = call(AppConfig::default(), "GET", "/healthz", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(serde_json::from_slice::<Value>(&b).unwrap()["status"], "ok");
}

#[tokio::test]
async fn hourly_cost() {
    let (s, v) = post_json("/api/cost/hourly", baseline_json()).await;
    assert_eq!(s, StatusCode::OK);
    let total = v["total_usd_hr"].as_f64().unwrap();
    assert!((0.78..=0.79).contains(&total));

    let mut zero = baseline_json();
    zero["purchase_price"] = json!(0.0);
    zero["avg_power_kw"] = json!(0.0);
    let (s, v) = post_json("/api/cost/hourly", zero).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["total_usd_hr"], json!(0.0));

    let mut bad = baseline_json();
    bad["utilization"] = json!(0.0);
    let (s, v) = post_json("/api/cost/hourly", bad).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["field"], "utilization");

    let (s, _) = call(AppConfig::default(), "POST", "/api/cost/hourly", Some("{not json".into())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn whatif_matches_library_call() {
    let body = json!({"cost_params": baseline_json(), "gpu_count": 2, "dataset": "fixture"});
    let (s, bytes) = call(AppConfig::default(), "POST", "/api/whatif", Some(body.to_string())).await;
    assert_eq!(s, StatusCode::OK);
    let got: WhatIfResult = serde_json::from_slice(&bytes).unwrap();
    let (sweeps, cards) = canonical_fixture();
    let want = what_if(&sweeps, &cards, &GpuCostParams::a800_baseline(), 2, &PerfThresholds::default()).unwrap();
    assert_eq!(got, want);
    assert_eq!(bytes, serde_json::to_vec(&want).unwrap());
    let chosen: Vec<(String, u32)> = got
        .optima
        .iter()
        .map(|c| (c.model_id.clone(), c.concurrency.unwrap()))
        .collect();
    assert_eq!(chosen.len(), 9);
    assert!(chosen.contains(&("gpt-oss-20b".into(), 64)));
    assert!(chosen.contains(&("WiNGPT-3.5".into(), 48)));
    assert_eq!(got.frontier.model_ids(), ["gpt-oss-20b", "Mistral-Small", "Qwen3-30B", "WiNGPT-3.5"]);

    // Identical bodies, identical bytes.
    let (_, again) = call(AppConfig::default(), "POST", "/api/whatif", Some(body.to_string())).await;
    assert_eq!(again, bytes);
}

#[tokio::test]
async fn stricter_throughput_shrinks_feasible_sets() {
    let (_, v) = post_json(
        "/api/whatif",
        json!({"thresholds": {"min_throughput_tok_s": 30.0}}),
    )
    .await;
    let w27 = v["optima"].as_array().unwrap().iter().find(|c| c["model_id"] == "WiNGPT-2.7").unwrap();
    assert_eq!(w27["concurrency"], 8);
    assert!((w27["cost_usd"].as_f64().unwrap() - 0.61).abs() < 0.005);
}

#[tokio::test]
async fn dataset_errors() {
    let (s, _) = post_json("/api/whatif", json!({"dataset": {"sweeps": [], "model_cards": []}})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let run = json!({
        "model_id": "m", "concurrency": 8, "request_count": 10, "total_time_s": 100.0,
        "avg_ttft_s": 0.2, "input_tokens": 5, "output_tokens": 5, "total_tokens": 10,
        "avg_throughput_tok_s": 30.0
    });
    let (s, v) = post_json(
        "/api/whatif",
        json!({"dataset": {"sweeps": [{"model_id": "m", "runs": [run]}], "model_cards": []}}),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["field"], "m");
    assert!(v["error"].as_str().unwrap().contains('m'));

    let mut bad = run.clone();
    bad["total_tokens"] = json!(11);
    let (s, v) = post_json("/api/whatif", json!({"dataset": {"sweeps": [{"model_id": "m", "runs": [bad]}]}})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["violations"][0]["field"], "total_tokens");

    let (s, _) = post_json("/api/whatif", json!({"dataset": "nope"})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = post_json("/api/whatif", json!({"gpu_count": 0})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = post_json("/api/whatif", json!({"surprise": 1})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn fixture_dataset() {
    let (s, b) = call(AppConfig::default(), "GET", "/api/datasets/wineval3", None).await;
    assert_eq!(s, StatusCode::OK);
    let v: Value = serde_json::from_slice(&b).unwrap();
    let sweeps = v["sweeps"].as_array().unwrap();
    assert_eq!(sweeps.len(), 9);
    for sweep in sweeps {
        let runs = sweep["runs"].as_array().unwrap();
        assert_eq!(runs.len(), 6);
        for r in runs {
            assert_eq!(
                r["total_tokens"].as_u64().unwrap(),
                r["input_tokens"].as_u64().unwrap() + r["output_tokens"].as_u64().unwrap()
            );
        }
    }
    let card = v["model_cards"].as_array().unwrap().iter().find(|c| c["model_id"] == "WiNGPT-3.5").unwrap();
    assert_eq!(card["quality_score"], 76.2);

    let (s, _) = call(AppConfig::default(), "GET", "/api/datasets/local", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn local_dataset_becomes_default() {
    let (sweeps, cards) = canonical_fixture();
    let local = inferonomics_core::Dataset {
        sweeps: sweeps.into_iter().filter(|s| s.model_id() == "Qwen3-30B").collect(),
        model_cards: cards,
    };
    let config = AppConfig {
        ui_dir: None,
        local_dataset: Some(local),
    };
    let (s, b) = call(config.clone(), "POST", "/api/whatif", Some("{}".into())).await;
    assert_eq!(s, StatusCode::OK);
    let v: Value = serde_json::from_slice(&b).unwrap();
    assert_eq!(v["optima"].as_array().unwrap().len(), 1);
    let (s, b) = call(config, "GET", "/api/datasets", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(serde_json::from_slice::<Value>(&b).unwrap()["datasets"], json!(["wineval3", "local"]));
}

#[tokio::test]
async fn ui_hosting() {
    let (s, b) = call(AppConfig::default(), "GET", "/", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(String::from_utf8(b).unwrap().contains("/api/whatif"));

    let dir = std::env::temp_dir().join(format!("inferonomics-ui-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<p>explorer</p>").unwrap();
    std::fs::write(dir.join("app.js"), "console.log(1)").unwrap();
    let config = AppConfig {
        ui_dir: Some(dir.clone()),
        local_dataset: None,
    };
    let (s, b) = call(config.clone(), "GET", "/", None).await;
    assert_eq!((s, b.as_slice()), (StatusCode::OK, b"<p>explorer</p>".as_slice()));
    let (s, b) = call(config.clone(), "GET", "/app.js", None).await;
    assert_eq!((s, b.as_slice()), (StatusCode::OK, b"console.log(1)".as_slice()));
    let (s, _) = call(config, "GET", "/healthz", None).await;
    assert_eq!(s, StatusCode::OK);
    std::fs::remove_dir_all(dir).unwrap();
}
