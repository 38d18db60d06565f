use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use super::views::{self, CellView, IndicatorsView};
use super::{AppState, JobOutcome, Session};
use crate::analytics::{self, Indicator, DEFAULT_HISTOGRAM_BINS};
use crate::assignment::AssignmentParams;
use crate::datasets;
use crate::error::Error;
use crate::io::{load_network, load_session, parse_trips, save_session};
use crate::network::{Projection, RoadId};
use crate::tree::{CostParams, Modification, StateId, StateTree};

#[derive(Debug)]
pub(super) struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} {id}"))
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    /// Any engine error as a rejected request, except unknown states.
    fn unprocessable(err: Error) -> Self {
        match err {
            Error::UnknownState(_) => err.into(),
            other => Self::new(StatusCode::UNPROCESSABLE_ENTITY, error_code(&other), other.to_string()),
        }
    }

    fn body(&self) -> Value {
        json!({ "error": { "code": self.code, "message": self.message } })
    }
}

fn error_code(err: &Error) -> &'static str {
    match err {
        Error::UnknownRoad(_) => "unknown_road",
        Error::UnknownNode(_) => "unknown_node",
        Error::UnknownState(_) => "unknown_state",
        Error::RootDeletion => "root_deletion",
        Error::Unreachable(_) => "unreachable",
        Error::UnknownIndicator(_) => "unknown_indicator",
        Error::Parse { .. } | Error::CountMismatch { .. } | Error::MissingCoordinates(_) => "parse",
        Error::SchemaVersion(_)
        | Error::Referential(_)
        | Error::ReplayMismatch { .. }
        | Error::Json(_) => "invalid_session",
        Error::Io(_) => "io",
        _ => "invalid_request",
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = match &err {
            Error::UnknownState(_) | Error::UnknownRoad(_) => StatusCode::NOT_FOUND,
            Error::RootDeletion => StatusCode::CONFLICT,
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, error_code(&err), err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

impl IntoResponse for JobOutcome {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", e.to_string())
    })
}

fn parse_id(what: &str, raw: &str) -> ApiResult<u64> {
    raw.parse().map_err(|_| ApiError::not_found(what, raw))
}

fn session(app: &AppState, raw: &str) -> ApiResult<(u64, Arc<Session>)> {
    let id = parse_id("session", raw)?;
    let s = app.session(id).ok_or_else(|| ApiError::not_found("session", raw))?;
    Ok((id, s))
}

fn to_value<T: serde::Serialize>(v: &T) -> ApiResult<Value> {
    serde_json::to_value(v).map_err(|e| ApiError::internal(e.to_string()))
}

/// Runs blocking engine work off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, Error> + Send + 'static,
) -> ApiResult<Result<T, Error>> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct CreateSession {
    dataset: Option<String>,
    network: Option<String>,
    trips: Option<String>,
    coords: Option<String>,
    projection: Option<Projection>,
    assignment_params: Option<AssignmentParams>,
    cost_params: Option<CostParams>,
}

fn created_session(app: &AppState, tree: StateTree, cost_params: CostParams) -> ApiResult<Response> {
    let root = views::state_summary(&tree, tree.root())?;
    let id = app.add_session(tree, cost_params);
    Ok((
        StatusCode::CREATED,
        Json(json!({ "session_id": id, "root": to_value(&root)? })),
    )
        .into_response())
}

pub(super) async fn create_session(State(app): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: CreateSession = parse_body(&body)?;
    let params = req.assignment_params.unwrap_or(app.config().assignment_params);
    params.validate().map_err(ApiError::unprocessable)?;
    let cost_params = req.cost_params.unwrap_or(app.config().cost_params);
    cost_params.validate().map_err(ApiError::unprocessable)?;
    let (network, demands) = match (req.dataset, req.network, req.trips) {
        (Some(name), None, None) => {
            let ds = datasets::by_name(&name).ok_or_else(|| {
                ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "unknown_dataset",
                    format!("unknown dataset {name:?}; available: {}", datasets::NAMES.join(", ")),
                )
            })?;
            (ds.network, ds.demands)
        }
        (None, Some(net), Some(trips)) => {
            let projection = req.projection.unwrap_or_default();
            let network = load_network(&net, req.coords.as_deref(), projection)
                .map_err(ApiError::unprocessable)?;
            let demands = parse_trips(&trips).map_err(ApiError::unprocessable)?.demands;
            (network, demands)
        }
        _ => {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_request",
                "give either `dataset` or both `network` and `trips`",
            ))
        }
    };
    let tree = blocking(move || StateTree::create(network, demands, params))
        .await?
        .map_err(ApiError::unprocessable)?;
    created_session(&app, tree, cost_params)
}

pub(super) async fn import_session(State(app): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let text = String::from_utf8(body.to_vec()).map_err(|e| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_session", e.to_string())
    })?;
    let (tree, cost_params) = blocking(move || load_session(&text))
        .await?
        .map_err(ApiError::unprocessable)?;
    created_session(&app, tree, cost_params)
}

pub(super) async fn export_session(
    State(app): State<AppState>,
    Path(sid): Path<String>,
) -> ApiResult<Response> {
    let (_, s) = session(&app, &sid)?;
    let text = save_session(&s.tree(), &s.cost_params())?;
    Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response())
}

pub(super) async fn get_tree(
    State(app): State<AppState>,
    Path(sid): Path<String>,
) -> ApiResult<Json<Value>> {
    let (_, s) = session(&app, &sid)?;
    let view = views::tree_view(&s.tree())?;
    let mut body = to_value(&view)?;
    body["cost_params"] = to_value(&s.cost_params())?;
    Ok(Json(body))
}

pub(super) async fn get_cost_params(
    State(app): State<AppState>,
    Path(sid): Path<String>,
) -> ApiResult<Json<CostParams>> {
    let (_, s) = session(&app, &sid)?;
    Ok(Json(s.cost_params()))
}

pub(super) async fn put_cost_params(
    State(app): State<AppState>,
    Path(sid): Path<String>,
    body: Bytes,
) -> ApiResult<Json<CostParams>> {
    let (_, s) = session(&app, &sid)?;
    let params: CostParams = parse_body(&body)?;
    params.validate().map_err(ApiError::unprocessable)?;
    let _guard = s.mutation.lock().await;
    s.set_cost_params(params);
    Ok(Json(params))
}

pub(super) async fn get_state(
    State(app): State<AppState>,
    Path((sid, id)): Path<(String, String)>,
) -> ApiResult<Json<views::StateView>> {
    let (_, s) = session(&app, &sid)?;
    let id = StateId(parse_id("state", &id)?);
    let view = views::state_view(&s.tree(), id)?;
    Ok(Json(view))
}

pub(super) async fn delete_state(
    State(app): State<AppState>,
    Path((sid, id)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let (_, s) = session(&app, &sid)?;
    let id = StateId(parse_id("state", &id)?);
    let _guard = s.mutation.lock().await;
    let removed = s.tree_mut().delete_state(id)?;
    Ok(Json(json!({ "removed": removed })))
}

pub(super) async fn get_od(
    State(app): State<AppState>,
    Path((sid, id, rid)): Path<(String, String, String)>,
) -> ApiResult<Json<views::OdView>> {
    let (_, s) = session(&app, &sid)?;
    let id = StateId(parse_id("state", &id)?);
    let road = u32::try_from(parse_id("road", &rid)?)
        .map(RoadId)
        .map_err(|_| ApiError::not_found("road", &rid))?;
    let view = views::od_view(&s.tree(), id, road)?;
    Ok(Json(view))
}

async fn run_modification(session: Arc<Session>, state: StateId, modification: Modification) -> JobOutcome {
    let _guard = session.mutation.lock().await;
    let outcome: ApiResult<JobOutcome> = async {
        let cost_params = session.cost_params();
        let worker = Arc::clone(&session);
        let pending = blocking(move || worker.tree().prepare(state, modification, &cost_params))
            .await?
            .map_err(ApiError::unprocessable)?;
        let converged = pending.assignment().converged;
        let mut tree = session.tree_mut();
        let id = tree.commit(pending).map_err(ApiError::unprocessable)?;
        let mut body = to_value(&views::state_summary(&tree, id)?)?;
        body["partial_result"] = Value::Bool(!converged);
        let status = if converged {
            StatusCode::CREATED
        } else {
            StatusCode::SERVICE_UNAVAILABLE
        };
        Ok(JobOutcome { status, body })
    }
    .await;
    outcome.unwrap_or_else(|e| JobOutcome {
        status: e.status,
        body: e.body(),
    })
}

pub(super) async fn post_modification(
    State(app): State<AppState>,
    Path((sid, id)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Response> {
    let (sid, s) = session(&app, &sid)?;
    let state = StateId(parse_id("state", &id)?);
    if !s.tree().contains(state) {
        return Err(Error::UnknownState(state).into());
    }
    let modification: Modification = parse_body(&body)?;

    let job = app.new_job(sid);
    let registry = app.clone();
    let task = tokio::spawn(async move {
        let outcome = run_modification(s, state, modification).await;
        if let Some(slot) = registry.jobs().get_mut(&job) {
            slot.1 = Some(outcome.clone());
        }
        outcome
    });
    match tokio::time::timeout(app.config().async_after, task).await {
        Ok(Ok(outcome)) => {
            app.jobs().remove(&job);
            Ok(outcome.into_response())
        }
        Ok(Err(e)) => {
            app.jobs().remove(&job);
            Err(ApiError::internal(format!("modification task failed: {e}")))
        }
        Err(_) => Ok((
            StatusCode::ACCEPTED,
            Json(json!({
                "job_id": job,
                "status": "pending",
                "poll": format!("/sessions/{sid}/jobs/{job}"),
            })),
        )
            .into_response()),
    }
}

pub(super) async fn get_job(
    State(app): State<AppState>,
    Path((sid, jid)): Path<(String, String)>,
) -> ApiResult<Response> {
    let (sid, _) = session(&app, &sid)?;
    let job = parse_id("job", &jid)?;
    let entry = app.jobs().get(&job).cloned();
    match entry {
        Some((owner, Some(outcome))) if owner == sid => Ok(outcome.into_response()),
        Some((owner, None)) if owner == sid => Ok((
            StatusCode::ACCEPTED,
            Json(json!({ "job_id": job, "status": "pending" })),
        )
            .into_response()),
        _ => Err(ApiError::not_found("job", &jid)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct SortSpec {
    key: String,
    #[serde(default = "yes")]
    descending: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct IndicatorsRequest {
    /// Defaults to every state in the tree.
    selected_states: Option<Vec<StateId>>,
    #[serde(default)]
    filters: BTreeMap<String, (f64, f64)>,
    /// Without a sort key roads come back in id order.
    sort: Option<SortSpec>,
    bins: Option<usize>,
}

pub(super) async fn post_indicators(
    State(app): State<AppState>,
    Path(sid): Path<String>,
    body: Bytes,
) -> ApiResult<Json<IndicatorsView>> {
    let (_, s) = session(&app, &sid)?;
    let req: IndicatorsRequest = parse_body(&body)?;
    let filters = req
        .filters
        .iter()
        .map(|(k, range)| Ok((k.parse::<Indicator>()?, *range)))
        .collect::<Result<BTreeMap<_, _>, Error>>()
        .map_err(ApiError::unprocessable)?;
    let sort = req
        .sort
        .as_ref()
        .map(|s| s.key.parse::<Indicator>().map(|k| (k, s.descending)))
        .transpose()
        .map_err(ApiError::unprocessable)?;
    let bins = req.bins.unwrap_or(DEFAULT_HISTOGRAM_BINS);

    let tree = s.tree();
    let all: Vec<StateId> = tree.nodes().map(|n| n.id).collect();
    let selected = req.selected_states.unwrap_or_else(|| all.clone());
    for id in &selected {
        tree.node(*id)?;
    }
    let indicators =
        analytics::compute_indicators(&tree, &selected).map_err(ApiError::unprocessable)?;
    let mut histograms = BTreeMap::new();
    for ind in Indicator::ALL {
        let values: Vec<f64> = indicators.iter().map(|r| r.get(ind)).collect();
        let h = analytics::histogram(&values, bins).map_err(ApiError::unprocessable)?;
        histograms.insert(ind, h);
    }
    let (key, descending) = sort.unwrap_or((Indicator::AvgFlow, false));
    let mut ordered_roads = analytics::filter_and_rank(&indicators, &filters, key, descending)
        .map_err(ApiError::unprocessable)?;
    if sort.is_none() {
        ordered_roads.sort();
    }
    let cells = analytics::cell_statuses(&tree, &all, &ordered_roads)?
        .into_iter()
        .map(CellView::from)
        .collect();
    let mut selected: Vec<StateId> = selected;
    selected.sort();
    selected.dedup();
    Ok(Json(IndicatorsView {
        selected_states: selected,
        indicators,
        histograms,
        ordered_roads,
        cells,
    }))
}
