use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use minnet_core::compile::{extended_minimal_network, ExtendedNetwork, PreferenceSpec};
use minnet_core::query::Exactness;
use minnet_core::{io, PartialAssignment, Tuple, Value};
use minnet_service::{
    answer_query, build_report, router, router_with_state, AppState, NetworkInfo, QueryRequest, Report,
};
use serde_json::{json, Value as Json};
use tower::ServiceExt;

fn fig1_compiled() -> ExtendedNetwork {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/fig1a.json");
    let net = io::network_from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
    extended_minimal_network(&net, 2, 2, &PreferenceSpec::min("X4")).unwrap()
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Json>) -> (StatusCode, Json) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(b) => {
            req = req.header("content-type", "application/json");
            Body::from(b.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let json = if bytes.is_empty() { Json::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, json)
}

async fn new_session(app: &Router) -> String {
    let (status, body) = call(app, "POST", "/session", None).await;
    assert_eq!(status, StatusCode::CREATED);
    body["session"].as_str().unwrap().to_string()
}

fn nums(xs: &[i64]) -> Vec<Value> {
    xs.iter().map(|&x| Value::Number(x)).collect()
}

#[tokio::test]
async fn network_metadata() {
    let app = router(fig1_compiled());
    let (status, body) = call(&app, "GET", "/network", None).await;
    assert_eq!(status, StatusCode::OK);
    let info: NetworkInfo = serde_json::from_value(body).unwrap();
    assert_eq!(info.variables.len(), 4);
    assert_eq!((info.k, info.top_k), (2, 2));
    assert!(!info.unsolvable);
    assert_eq!(info.preference, PreferenceSpec::min("X4"));
}

#[tokio::test]
async fn unsolvable_base_is_flagged() {
    let net = minnet_core::Network::new([("A", nums(&[1])), ("B", nums(&[1]))]).unwrap();
    let scope = net.scope(&["A", "B"]).unwrap();
    let net = net.with_constraint(minnet_core::Relation::empty(scope)).unwrap();
    let m = extended_minimal_network(&net, 2, 1, &PreferenceSpec::none()).unwrap();
    let (_, body) = call(&router(m), "GET", "/network", None).await;
    assert_eq!(body["unsolvable"], json!(true));
}

#[tokio::test]
async fn pin_collapses_domains() {
    let m = fig1_compiled();
    let app = router(m.clone());
    let id = new_session(&app).await;
    let (status, body) = call(&app, "POST", &format!("/session/{id}/pin"), Some(json!({"var": "X4", "value": 1}))).await;
    assert_eq!(status, StatusCode::OK);
    let report: Report = serde_json::from_value(body).unwrap();
    assert_eq!(report.feasible["X1"], nums(&[1]));
    assert_eq!(report.feasible["X2"], nums(&[1, 2]));
    assert_eq!(report.feasible["X3"], nums(&[2]));
    assert_eq!(report.witness, Some(Tuple::numbers(&[1, 1, 2, 1])));
    assert_eq!(report.exactness, Exactness::Exact);

    let mut pinned = PartialAssignment::new();
    pinned.insert(m.base.var("X4").unwrap().clone(), Value::Number(1));
    assert_eq!(report, build_report(&m, &id, &pinned).unwrap());
}

#[tokio::test]
async fn pin_then_unpin_restores_report() {
    let app = router(fig1_compiled());
    let id = new_session(&app).await;
    let (_, initial) = call(&app, "GET", &format!("/session/{id}"), None).await;
    call(&app, "POST", &format!("/session/{id}/pin"), Some(json!({"var": "X2", "value": 4}))).await;
    let (status, after) = call(&app, "DELETE", &format!("/session/{id}/pin/X2"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(initial, after);
    assert_eq!(initial["feasible"]["X2"], json!([1, 2, 4]));
}

#[tokio::test]
async fn conflicting_pin_is_rejected() {
    let app = router(fig1_compiled());
    let id = new_session(&app).await;
    let (status, _) = call(&app, "POST", &format!("/session/{id}/pin"), Some(json!({"var": "X1", "value": 3}))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, body) = call(&app, "POST", &format!("/session/{id}/pin"), Some(json!({"var": "X4", "value": 1}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("X4 = 1"));
    // the rejected pin leaves the session unchanged
    let (_, body) = call(&app, "GET", &format!("/session/{id}"), None).await;
    assert_eq!(body["pinned"], json!({"X1": 3}));
    assert_eq!(body["witness"], json!([3, 4, 1, 2]));
    let (status, _) = call(&app, "POST", &format!("/session/{id}/pin"), Some(json!({"var": "X9", "value": 1}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn unknown_session_is_404() {
    let app = router(fig1_compiled());
    let (status, _) = call(&app, "GET", "/session/00000000-0000-0000-0000-000000000000", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/session/nope/pin", Some(json!({"var": "X1", "value": 1}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "DELETE", "/session/nope/pin/X1", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sessions_are_independent() {
    let app = router(fig1_compiled());
    let a = new_session(&app).await;
    let b = new_session(&app).await;
    call(&app, "POST", &format!("/session/{a}/pin"), Some(json!({"var": "X1", "value": 2}))).await;
    let (_, body) = call(&app, "GET", &format!("/session/{b}"), None).await;
    assert_eq!(body["pinned"], json!({}));
    assert_eq!(body["feasible"]["X1"], json!([1, 2, 3]));
}

#[tokio::test]
async fn idle_sessions_expire() {
    let state = Arc::new(AppState::new(fig1_compiled(), Duration::from_millis(50)));
    let app = router_with_state(state);
    let id = new_session(&app).await;
    tokio::time::sleep(Duration::from_millis(120)).await;
    let (status, _) = call(&app, "GET", &format!("/session/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn queries_match_library() {
    let m = fig1_compiled();
    let app = router(m.clone());
    for (phi, count) in [
        ("X4 <= 3", None),
        ("X2 < X1", None),
        ("X1 < X4", None),
        ("X2 >= 1", Some(2)),
        ("X1 = 3", Some(1)),
        ("X1 = 1 and X2 = 2 and X3 = 2", None),
    ] {
        let body = match count {
            Some(c) => json!({"phi": phi, "count": c}),
            None => json!({"phi": phi}),
        };
        let (status, got) = call(&app, "POST", "/query", Some(body)).await;
        assert_eq!(status, StatusCode::OK, "{phi}");
        let direct = answer_query(&m, &QueryRequest { phi: phi.into(), count }).unwrap();
        assert_eq!(got, serde_json::to_value(&direct).unwrap(), "{phi}");
    }
    let (_, got) = call(&app, "POST", "/query", Some(json!({"phi": "X1 < X4"}))).await;
    assert_eq!(got["satisfiable"], json!(false));
    assert_eq!(got["exactness"], json!("exact"));
    let (_, got) = call(&app, "POST", "/query", Some(json!({"phi": "X2 >= 1", "count": 2}))).await;
    assert_eq!(got["top"], json!([[1, 1, 2, 1], [1, 2, 2, 1]]));
}

#[tokio::test]
async fn bad_queries_are_400() {
    let app = router(fig1_compiled());
    for phi in ["X1 <", "X9 = 1", "X1 < 'a'"] {
        let (status, body) = call(&app, "POST", "/query", Some(json!({"phi": phi}))).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{phi}");
        assert!(body["error"].is_string());
    }
}

#[tokio::test]
async fn cors_headers_present() {
    let app = router(fig1_compiled());
    let req = Request::builder()
        .method("GET")
        .uri("/network")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}
