//! HTTP configurator service over a compiled extended minimal network.
//!
//! Endpoints:
//! - `GET /network`: variables, domains, k, K, preference, unsolvable flag
//! - `POST /session`: new session, returns its feasibility report
//! - `GET /session/{id}`: current report
//! - `POST /session/{id}/pin` with `{"var": .., "value": ..}`
//! - `DELETE /session/{id}/pin/{var}`
//! - `POST /query` with `{"phi": .., "count": ..}`

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use minnet_core::compile::{ExtendedNetwork, PreferenceSpec};
use minnet_core::query::{
    prune_domains, select_solution, top_k_solutions, Exactness, Query, QueryAnswer,
};
use minnet_core::{PartialAssignment, Tuple, Value};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use uuid::Uuid;

pub const DEFAULT_TTL: Duration = Duration::from_secs(30 * 60);

struct Session {
    pinned: PartialAssignment,
    touched: Instant,
}

pub struct AppState {
    network: Arc<ExtendedNetwork>,
    sessions: Mutex<HashMap<Uuid, Session>>,
    ttl: Duration,
}

impl AppState {
    pub fn new(network: ExtendedNetwork, ttl: Duration) -> Self {
        AppState {
            network: Arc::new(network),
            sessions: Mutex::new(HashMap::new()),
            ttl,
        }
    }

    fn purge(&self, sessions: &mut HashMap<Uuid, Session>) {
        let now = Instant::now();
        sessions.retain(|_, s| now.duration_since(s.touched) < self.ttl);
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct VariableInfo {
    pub name: String,
    pub domain: Vec<Value>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct NetworkInfo {
    pub variables: Vec<VariableInfo>,
    pub k: usize,
    #[serde(rename = "K")]
    pub top_k: usize,
    pub preference: PreferenceSpec,
    pub unsolvable: bool,
}

/// Feasibility report for a session. `feasible` lists the values each
/// variable can still take together with the pins.
#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Report {
    pub session: String,
    pub pinned: BTreeMap<String, Value>,
    pub feasible: BTreeMap<String, Vec<Value>>,
    pub exactness: Exactness,
    pub witness: Option<Tuple>,
    pub witness_exactness: Exactness,
    pub top: Vec<Tuple>,
    pub top_exactness: Exactness,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PinRequest {
    pub var: String,
    pub value: Value,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueryRequest {
    pub phi: String,
    #[serde(default)]
    pub count: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorBody { error: self.1 })).into_response()
    }
}

fn internal(e: minnet_core::Error) -> ApiError {
    ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
}

pub fn network_info(m: &ExtendedNetwork) -> NetworkInfo {
    NetworkInfo {
        variables: m
            .base
            .variables()
            .iter()
            .zip(m.base.domains())
            .map(|(v, d)| VariableInfo {
                name: v.name().to_string(),
                domain: d.clone(),
            })
            .collect(),
        k: m.k,
        top_k: m.top_k,
        preference: m.preference.clone(),
        unsolvable: m.is_unsolvable(),
    }
}

/// The report a session with these pins receives. Exposed so clients and
/// tests can compare the service against direct library calls.
pub fn build_report(
    m: &ExtendedNetwork,
    id: &str,
    pinned: &PartialAssignment,
) -> minnet_core::Result<Report> {
    let pruning = prune_domains(m, pinned)?;
    let q = Query::from_assignment(pinned);
    let sel = select_solution(m, &q)?;
    let top = top_k_solutions(m, &q, m.top_k)?;
    Ok(Report {
        session: id.to_string(),
        pinned: pinned
            .iter()
            .map(|(v, x)| (v.name().to_string(), x.clone()))
            .collect(),
        feasible: pruning
            .feasible
            .into_iter()
            .map(|(v, xs)| (v.name().to_string(), xs))
            .collect(),
        exactness: pruning.exactness,
        witness: sel.witness,
        witness_exactness: sel.exactness,
        top: top.top,
        top_exactness: top.exactness,
    })
}

pub fn router(network: ExtendedNetwork) -> Router {
    router_with_state(Arc::new(AppState::new(network, DEFAULT_TTL)))
}

pub fn router_with_state(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/network", get(get_network))
        .route("/session", post(create_session))
        .route("/session/{id}", get(get_session))
        .route("/session/{id}/pin", post(pin))
        .route("/session/{id}/pin/{var}", delete(unpin))
        .route("/query", post(run_query))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(network: ExtendedNetwork, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(network)).await
}

async fn get_network(State(st): State<Arc<AppState>>) -> Json<NetworkInfo> {
    Json(network_info(&st.network))
}

async fn create_session(
    State(st): State<Arc<AppState>>,
) -> Result<(StatusCode, Json<Report>), ApiError> {
    let id = Uuid::new_v4();
    let report = build_report(&st.network, &id.to_string(), &PartialAssignment::new())
        .map_err(internal)?;
    let mut sessions = st.sessions.lock().expect("session lock");
    st.purge(&mut sessions);
    sessions.insert(
        id,
        Session {
            pinned: PartialAssignment::new(),
            touched: Instant::now(),
        },
    );
    Ok((StatusCode::CREATED, Json(report)))
}

fn parse_id(id: &str) -> Result<Uuid, ApiError> {
    Uuid::parse_str(id).map_err(|_| ApiError(StatusCode::NOT_FOUND, format!("unknown session {id}")))
}

/// Runs `f` on the live session, refreshing its idle timer.
fn with_session<T>(
    st: &AppState,
    id: &str,
    f: impl FnOnce(&mut Session) -> Result<T, ApiError>,
) -> Result<T, ApiError> {
    let uuid = parse_id(id)?;
    let mut sessions = st.sessions.lock().expect("session lock");
    st.purge(&mut sessions);
    let s = sessions
        .get_mut(&uuid)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown session {id}")))?;
    s.touched = Instant::now();
    f(s)
}

async fn get_session(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<Report>, ApiError> {
    let pinned = with_session(&st, &id, |s| Ok(s.pinned.clone()))?;
    Ok(Json(build_report(&st.network, &id, &pinned).map_err(internal)?))
}

fn unprocessable(msg: String) -> ApiError {
    ApiError(StatusCode::UNPROCESSABLE_ENTITY, msg)
}

async fn pin(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<PinRequest>,
) -> Result<Json<Report>, ApiError> {
    let m = st.network.clone();
    let pinned = with_session(&st, &id, |s| {
        let var = m
            .base
            .var(&req.var)
            .cloned()
            .ok_or_else(|| unprocessable(format!("unknown variable {}", req.var)))?;
        if m.base.domain(&var).binary_search(&req.value).is_err() {
            return Err(unprocessable(format!(
                "{} is not in the domain of {}",
                req.value, req.var
            )));
        }
        let mut others = s.pinned.clone();
        others.remove(&var);
        let pruning = prune_domains(&m, &others).map_err(internal)?;
        let allowed = pruning
            .feasible
            .get(&var)
            .is_some_and(|xs| xs.contains(&req.value));
        if !allowed {
            return Err(unprocessable(format!(
                "{} = {} has no solution together with the current pins",
                req.var, req.value
            )));
        }
        let mut next = others;
        next.insert(var, req.value.clone());
        if pruning.exactness == Exactness::BestEffort {
            let probe = select_solution(&m, &Query::from_assignment(&next)).map_err(internal)?;
            if !probe.satisfiable && !probe.budget_exhausted {
                return Err(unprocessable(format!(
                    "{} = {} has no solution together with the current pins",
                    req.var, req.value
                )));
            }
        }
        s.pinned = next.clone();
        Ok(next)
    })?;
    Ok(Json(build_report(&m, &id, &pinned).map_err(internal)?))
}

async fn unpin(
    State(st): State<Arc<AppState>>,
    Path((id, var)): Path<(String, String)>,
) -> Result<Json<Report>, ApiError> {
    let m = st.network.clone();
    let pinned = with_session(&st, &id, |s| {
        if let Some(v) = m.base.var(&var) {
            s.pinned.remove(v);
        }
        Ok(s.pinned.clone())
    })?;
    Ok(Json(build_report(&m, &id, &pinned).map_err(internal)?))
}

/// The answer `POST /query` returns for a request, computed directly.
pub fn answer_query(m: &ExtendedNetwork, req: &QueryRequest) -> minnet_core::Result<QueryAnswer> {
    let q = Query::parse(&req.phi)?;
    match req.count {
        Some(n) => top_k_solutions(m, &q, n),
        None => select_solution(m, &q),
    }
}

async fn run_query(
    State(st): State<Arc<AppState>>,
    Json(req): Json<QueryRequest>,
) -> Result<Json<QueryAnswer>, ApiError> {
    answer_query(&st.network, &req).map(Json).map_err(|e| match e {
        minnet_core::Error::Query(_) => ApiError(StatusCode::BAD_REQUEST, e.to_string()),
        other => internal(other),
    })
}
