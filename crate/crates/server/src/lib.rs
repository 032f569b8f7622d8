//! JSON API over the cost model, selection and frontier, plus static hosting
//! for the what-if explorer.
//!
//! | Method | Path | Body | Response |
//! |---|---|---|---|
//! | GET | `/healthz` | | `{"status":"ok"}` |
//! | POST | `/api/cost/hourly` | cost parameters | hourly breakdown |
//! | POST | `/api/whatif` | [`WhatIfRequest`] | what-if result |
//! | GET | `/api/datasets` | | available dataset ids |
//! | GET | `/api/datasets/{id}` | | `{id, sweeps, model_cards}` |
//!
//! Errors are `{"error": message, "field"?: name, "violations"?: [...]}` with
//! status 400 for invalid input, 404 for unknown datasets and 422 when a
//! sweep has no quality score.
//!
//! Every handler is a pure function of its request body; the service keeps no
//! state between requests.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use inferonomics_core::cost_model::{hourly_breakdown, CostError, GpuCostParams};
use inferonomics_core::dataset::{canonical_dataset, parse_dataset_value, RowViolation, FIXTURE_DATASET_ID};
use inferonomics_core::selection::{what_if, PerfThresholds, SelectionError};
use inferonomics_core::{Dataset, DatasetError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::{ServeDir, ServeFile};

pub const LOCAL_DATASET_ID: &str = "local";

fn default_gpu_count() -> u32 {
    2
}

/// Body of `POST /api/whatif`. Omitted fields fall back to the reference
/// hardware, two cards, default thresholds and the server's default dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    #[serde(default)]
    pub cost_params: GpuCostParams,
    #[serde(default = "default_gpu_count")]
    pub gpu_count: u32,
    #[serde(default)]
    pub thresholds: PerfThresholds,
    /// `"fixture"`, a dataset id, or an inline `{sweeps, model_cards}`
    /// document.
    #[serde(default)]
    pub dataset: Option<Value>,
}

#[derive(Debug, Clone, Default)]
pub struct AppConfig {
    /// Directory holding the built UI bundle, served at `/`.
    pub ui_dir: Option<PathBuf>,
    /// Dataset loaded at startup, exposed as `local` and used by default.
    pub local_dataset: Option<Dataset>,
}

struct AppState {
    fixture: Dataset,
    local: Option<Dataset>,
}

impl AppState {
    fn named(&self, id: &str) -> Option<&Dataset> {
        match id {
            "fixture" | FIXTURE_DATASET_ID => Some(&self.fixture),
            LOCAL_DATASET_ID => self.local.as_ref(),
            _ => None,
        }
    }

    fn default_dataset(&self) -> &Dataset {
        self.local.as_ref().unwrap_or(&self.fixture)
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    violations: Option<Vec<RowViolation>>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: message.into(),
                field: None,
                violations: None,
            },
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl From<CostError> for ApiError {
    fn from(e: CostError) -> Self {
        let mut err = Self::bad_request(e.to_string());
        err.body.field = e.field().map(str::to_string);
        err
    }
}

impl From<DatasetError> for ApiError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Cost(c) => c.into(),
            DatasetError::Invalid(v) => {
                let mut err = Self::bad_request(DatasetError::Invalid(v.clone()).to_string());
                err.body.violations = Some(v);
                err
            }
            other => Self::bad_request(other.to_string()),
        }
    }
}

impl From<SelectionError> for ApiError {
    fn from(e: SelectionError) -> Self {
        match e {
            SelectionError::MissingScore(model) => {
                let mut err = Self::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    SelectionError::MissingScore(model.clone()).to_string(),
                );
                err.body.field = Some(model);
                err
            }
            SelectionError::Cost(c) => c.into(),
            SelectionError::Dataset(d) => d.into(),
            SelectionError::InvalidThreshold { field, .. } => {
                let mut err = Self::bad_request(e.to_string());
                err.body.field = Some(field.to_string());
                err
            }
            other => Self::bad_request(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

async fn healthz() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

async fn cost_hourly(body: Bytes) -> Result<Response, ApiError> {
    let params: GpuCostParams = parse_body(&body)?;
    Ok(Json(hourly_breakdown(&params)?).into_response())
}

async fn whatif(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: WhatIfRequest = parse_body(&body)?;
    let inline;
    let dataset = match &req.dataset {
        None => state.default_dataset(),
        Some(Value::String(id)) => state
            .named(id)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown dataset `{id}`")))?,
        Some(doc) => {
            inline = parse_dataset_value(doc)?;
            &inline
        }
    };
    let result = what_if(&dataset.sweeps, &dataset.model_cards, &req.cost_params, req.gpu_count, &req.thresholds)?;
    Ok(Json(result).into_response())
}

async fn list_datasets(State(state): State<Arc<AppState>>) -> Json<Value> {
    let mut ids = vec![FIXTURE_DATASET_ID];
    if state.local.is_some() {
        ids.push(LOCAL_DATASET_ID);
    }
    Json(json!({"datasets": ids}))
}

async fn get_dataset(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let dataset = state
        .named(&id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown dataset `{id}`")))?;
    Ok(Json(json!({
        "id": id,
        "sweeps": dataset.sweeps,
        "model_cards": dataset.model_cards,
    }))
    .into_response())
}

const PLACEHOLDER_INDEX: &str = r#"<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>inferonomics</title></head>
<body>
<h1>inferonomics API</h1>
<p>No UI bundle is configured. Endpoints:</p>
<ul>
<li><code>GET /healthz</code></li>
<li><code>POST /api/cost/hourly</code></li>
<li><code>POST /api/whatif</code></li>
<li><code>GET /api/datasets/wineval3</code></li>
</ul>
</body>
</html>
"#;

async fn placeholder() -> Html<&'static str> {
    Html(PLACEHOLDER_INDEX)
}

pub fn app(config: AppConfig) -> Router {
    let state = Arc::new(AppState {
        fixture: canonical_dataset(),
        local: config.local_dataset,
    });
    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/api/cost/hourly", post(cost_hourly))
        .route("/api/whatif", post(whatif))
        .route("/api/datasets", get(list_datasets))
        .route("/api/datasets/{id}", get(get_dataset))
        .with_state(state);
    match config.ui_dir {
        Some(dir) => {
            let index = dir.join("index.html");
            api.fallback_service(ServeDir::new(dir).not_found_service(ServeFile::new(index)))
        }
        None => api.route("/", get(placeholder)),
    }
}

/// Serves until `shutdown` resolves.
pub async fn serve<F>(listener: tokio::net::TcpListener, config: AppConfig, shutdown: F) -> std::io::Result<()>
where
    F: std::future::Future<Output = ()> + Send + 'static,
{
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app(config)).with_graceful_shutdown(shutdown).await
}
