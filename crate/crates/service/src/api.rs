//! JSON HTTP API.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | /api/scenarios | store a scenario |
//! | GET | /api/scenarios | list scenarios |
//! | GET | /api/scenarios/{id} | one scenario |
//! | POST | /api/runs | queue a run, 202 with its id |
//! | GET | /api/runs | run summaries |
//! | GET | /api/runs/{id} | status and trace |
//! | GET | /api/runs/{id}/results | solutions, best first |
//! | POST | /api/runs/{id}/cancel | request cancellation |
//! | GET | /api/runs/{id}/events | NDJSON progress stream |
//! | POST | /api/simulate | one budget simulation |
//!
//! Errors are `{"code": ..., "message": ...}`.

use std::convert::Infallible;
use std::sync::Arc;

use altbudget_core::budget::{simulate_multi_year, BudgetSolution, MultiYearScenario};
use altbudget_core::ga::GenerationStats;
use altbudget_core::operational::{simulate_decoded, OperationalDecode};
use altbudget_core::pipeline::{BudgetPlan, PipelineError, RunConfig, ScenarioRef};
use axum::body::{Body, Bytes};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::runs::{CancelOutcome, Executor, LiveRun, StoreResolver};
use crate::store::{RunRecord, RunStatus, ScenarioAnchors, ScenarioRecord, Store};

#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            code: code.into(),
            message: message.into(),
        }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "not_found",
            format!("no {what} with id '{id}'"),
        )
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "validation_failed",
            message,
        )
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        Self::invalid(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Parses a JSON body, reporting the path of the offending field.
fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ApiError::invalid(format!("{path}: {}", e.into_inner()))
    })
}

fn parse_id(raw: &str, what: &str) -> ApiResult<Uuid> {
    Uuid::parse_str(raw).map_err(|_| ApiError::not_found(what, raw))
}

#[derive(Clone)]
pub struct AppState {
    executor: Arc<Executor>,
}

impl AppState {
    /// Opens the store and fails runs interrupted by a previous shutdown.
    pub fn new(store: Store, workers: usize) -> std::io::Result<Self> {
        let n = store.fail_interrupted()?;
        if n > 0 {
            tracing::warn!(runs = n, "marked interrupted runs as failed");
        }
        Ok(Self {
            executor: Arc::new(Executor::new(store, workers)),
        })
    }

    pub fn executor(&self) -> &Arc<Executor> {
        &self.executor
    }

    fn store(&self) -> &Store {
        self.executor.store()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/scenarios", post(create_scenario).get(list_scenarios))
        .route("/api/scenarios/{id}", get(get_scenario))
        .route("/api/runs", post(create_run).get(list_runs))
        .route("/api/runs/{id}", get(get_run))
        .route("/api/runs/{id}/results", get(get_results))
        .route("/api/runs/{id}/cancel", post(cancel_run))
        .route("/api/runs/{id}/events", get(run_events))
        .route("/api/simulate", post(simulate))
        .with_state(state)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateScenario {
    #[serde(default)]
    name: Option<String>,
    scenario: MultiYearScenario,
    #[serde(default)]
    anchors: Option<ScenarioAnchors>,
}

async fn create_scenario(
    State(state): State<AppState>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<ScenarioRecord>)> {
    let req: CreateScenario = parse_body(&body)?;
    req.scenario
        .validate()
        .map_err(|e| ApiError::invalid(format!("scenario: {e}")))?;
    let record = ScenarioRecord {
        scenario_id: Uuid::new_v4(),
        name: req.name.unwrap_or_else(|| req.scenario.name.clone()),
        scenario: req.scenario,
        anchors: req.anchors,
        created_at: Utc::now(),
    };
    state
        .store()
        .put_scenario(&record)
        .map_err(ApiError::internal)?;
    Ok((StatusCode::CREATED, Json(record)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario_id: Uuid,
    pub name: String,
    pub years: usize,
    pub created_at: DateTime<Utc>,
}

async fn list_scenarios(State(state): State<AppState>) -> ApiResult<Json<Vec<ScenarioSummary>>> {
    let all = state.store().scenarios().map_err(ApiError::internal)?;
    Ok(Json(
        all.into_iter()
            .map(|r| ScenarioSummary {
                scenario_id: r.scenario_id,
                name: r.name,
                years: r.scenario.years,
                created_at: r.created_at,
            })
            .collect(),
    ))
}

async fn get_scenario(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<ScenarioRecord>> {
    let uuid = parse_id(&id, "scenario")?;
    state
        .store()
        .scenario(uuid)
        .map_err(ApiError::internal)?
        .map(Json)
        .ok_or_else(|| ApiError::not_found("scenario", &id))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunCreated {
    pub run_id: Uuid,
    pub status: RunStatus,
}

async fn create_run(
    State(state): State<AppState>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<RunCreated>)> {
    let config: RunConfig = parse_body(&body)?;
    let run_id = state.executor().submit(config)?;
    Ok((
        StatusCode::ACCEPTED,
        Json(RunCreated {
            run_id,
            status: RunStatus::Pending,
        }),
    ))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: Uuid,
    pub status: RunStatus,
    pub generations: usize,
    pub best: Option<f64>,
    pub created_at: DateTime<Utc>,
}

async fn list_runs(State(state): State<AppState>) -> ApiResult<Json<Vec<RunSummary>>> {
    let stored = state.store().runs().map_err(ApiError::internal)?;
    let ex = state.executor();
    let runs = stored
        .into_iter()
        .map(|r| ex.live(r.run_id).map(|l| l.snapshot()).unwrap_or(r))
        .map(|r| RunSummary {
            run_id: r.run_id,
            status: r.status,
            generations: r.trace.len().saturating_sub(1),
            best: r.trace.last().map(|s| s.best),
            created_at: r.created_at,
        })
        .collect();
    Ok(Json(runs))
}

fn find_run(state: &AppState, id: &str) -> ApiResult<RunRecord> {
    let uuid = parse_id(id, "run")?;
    state
        .executor()
        .record(uuid)
        .map_err(ApiError::internal)?
        .ok_or_else(|| ApiError::not_found("run", id))
}

/// Run status and trace without the (large) results.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunView {
    pub run_id: Uuid,
    pub status: RunStatus,
    pub config: RunConfig,
    pub trace: Vec<GenerationStats>,
    pub result_count: usize,
    pub error: Option<String>,
    pub created_at: DateTime<Utc>,
    pub started_at: Option<DateTime<Utc>>,
    pub finished_at: Option<DateTime<Utc>>,
}

async fn get_run(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<RunView>> {
    let r = find_run(&state, &id)?;
    Ok(Json(RunView {
        run_id: r.run_id,
        status: r.status,
        config: r.config,
        trace: r.trace,
        result_count: r.results.len(),
        error: r.error,
        created_at: r.created_at,
        started_at: r.started_at,
        finished_at: r.finished_at,
    }))
}

async fn get_results(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let r = find_run(&state, &id)?;
    let body = serde_json::to_vec(&r.results).map_err(ApiError::internal)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn cancel_run(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<(StatusCode, Json<RunCreated>)> {
    let uuid = parse_id(&id, "run")?;
    match state.executor().cancel(uuid).map_err(ApiError::internal)? {
        CancelOutcome::Requested => Ok((
            StatusCode::ACCEPTED,
            Json(RunCreated {
                run_id: uuid,
                status: state
                    .executor()
                    .record(uuid)
                    .ok()
                    .flatten()
                    .map_or(RunStatus::Pending, |r| r.status),
            }),
        )),
        CancelOutcome::AlreadyFinished(status) => Err(ApiError::new(
            StatusCode::CONFLICT,
            "run_finished",
            format!("run {uuid} already finished with status {status:?}"),
        )),
        CancelOutcome::Unknown => Err(ApiError::not_found("run", &id)),
    }
}

/// One line of the events stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RunEvent {
    Generation(GenerationStats),
    Status { status: RunStatus },
}

fn ndjson(events: &[RunEvent]) -> Bytes {
    let mut out = Vec::new();
    for e in events {
        serde_json::to_writer(&mut out, e).expect("events serialize");
        out.push(b'\n');
    }
    Bytes::from(out)
}

fn stored_events(record: &RunRecord) -> Vec<RunEvent> {
    record
        .trace
        .iter()
        .map(|s| RunEvent::Generation(*s))
        .chain(std::iter::once(RunEvent::Status {
            status: record.status,
        }))
        .collect()
}

async fn run_events(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let uuid = parse_id(&id, "run")?;
    let ndjson_header = [(header::CONTENT_TYPE, "application/x-ndjson")];
    let Some(live) = state.executor().live(uuid) else {
        let record = find_run(&state, &id)?;
        return Ok((ndjson_header, ndjson(&stored_events(&record))).into_response());
    };
    Ok((ndjson_header, Body::from_stream(live_events(live))).into_response())
}

/// Streams generations as they complete, then the final status.
fn live_events(live: Arc<LiveRun>) -> impl futures::Stream<Item = Result<Bytes, Infallible>> {
    let rx = live.subscribe();
    futures::stream::unfold(Some((live, rx, 0usize)), |state| async move {
        let (live, mut rx, sent) = state?;
        loop {
            rx.borrow_and_update();
            let (fresh, status) = live.progress_since(sent);
            let mut events: Vec<RunEvent> =
                fresh.iter().map(|s| RunEvent::Generation(*s)).collect();
            let sent = sent + fresh.len();
            if status.is_terminal() {
                events.push(RunEvent::Status { status });
                return Some((Ok(ndjson(&events)), None));
            }
            if !events.is_empty() {
                return Some((Ok(ndjson(&events)), Some((live, rx, sent))));
            }
            if rx.changed().await.is_err() {
                return None;
            }
        }
    })
}

/// What-if probe: either explicit levels or a project/tax-rate plan.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateRequest {
    scenario: ScenarioRef,
    #[serde(default)]
    plan: Option<BudgetPlan>,
    #[serde(default)]
    decoded: Option<OperationalDecode>,
}

async fn simulate(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<BudgetSolution>> {
    let req: SimulateRequest = parse_body(&body)?;
    let scenario = req.scenario.load(&StoreResolver(state.store()))?;
    let solution = match (req.plan, req.decoded) {
        (Some(plan), None) => {
            let taxes = scenario.tax_levels(&plan.taxes);
            simulate_multi_year(&scenario, &plan.investment, &taxes)
                .map_err(|e| ApiError::invalid(e.to_string()))?
        }
        (None, Some(decoded)) => {
            simulate_decoded(&scenario, &decoded).map_err(|e| ApiError::invalid(e.to_string()))?
        }
        _ => {
            return Err(ApiError::invalid(
                "exactly one of 'plan' and 'decoded' is required",
            ))
        }
    };
    Ok(Json(solution))
}
