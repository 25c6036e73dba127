use std::process::Command;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use samlfd::service::{router, AppState, ServiceConfig};
use samlfd::shapes;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(state: &AppState, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn state() -> AppState {
    AppState::new(ServiceConfig::default()).unwrap()
}

fn create_body(shape: &str, resolution: usize) -> Value {
    json!({
        "demo": shapes::by_name(shape, 100).unwrap(),
        "config": { "metric": "frechet", "grid": { "resolution": resolution } }
    })
}

#[tokio::test]
async fn session_lifecycle() {
    let st = state();
    let (code, created) = call(&st, "POST", "/sessions", Some(create_body("s_curve", 5))).await;
    assert_eq!(code, StatusCode::CREATED, "{created}");
    assert_eq!(created["status"], "ready");
    assert_eq!(created["id"], created["session"]["id"]);
    let id = created["id"].as_str().unwrap().to_string();

    let (code, got) = call(&st, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(got["session"], created["session"]);

    let (code, region) = call(&st, "GET", &format!("/sessions/{id}/region?robust=0.9"), None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(region["labels"], created["session"]["map"]["best_label"]);
    assert_eq!(region["robust_mask"].as_array().unwrap().len(), 25);

    let point = created["session"]["map"]["grid"]["points"][3].clone();
    let (code, repro) = call(&st, "POST", &format!("/sessions/{id}/reproduce"), Some(json!({ "point": point }))).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(repro["representation"], created["session"]["map"]["best_label"][3]);
}

#[tokio::test]
async fn errors_map_to_status_codes() {
    let st = state();
    assert_eq!(call(&st, "GET", "/sessions/deadbeef", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&st, "GET", "/sessions/deadbeef/region", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&st, "POST", "/sessions", Some(json!({ "demo": 3 }))).await.0, StatusCode::BAD_REQUEST);
    let (code, body) = call(&st, "POST", "/sessions", Some(create_body("s_curve", 1))).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("resolution"), "{body}");
    let mut bad_metric = create_body("s_curve", 3);
    bad_metric["config"]["metric"] = json!("cosine");
    assert_eq!(call(&st, "POST", "/sessions", Some(bad_metric)).await.0, StatusCode::BAD_REQUEST);

    let (_, created) = call(&st, "POST", "/sessions", Some(create_body("line", 3))).await;
    let id = created["id"].as_str().unwrap();
    let uri = format!("/sessions/{id}/reproduce");
    assert_eq!(call(&st, "POST", &uri, Some(json!({ "point": [0.0] }))).await.0, StatusCode::BAD_REQUEST);
    let uri = format!("/sessions/{id}/region?robust=2");
    assert_eq!(call(&st, "GET", &uri, None).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn background_creation_returns_accepted() {
    let st = state();
    let mut body = create_body("zigzag", 3);
    body["wait"] = json!(false);
    let (code, env) = call(&st, "POST", "/sessions", Some(body)).await;
    assert_eq!(code, StatusCode::ACCEPTED);
    let id = env["id"].as_str().unwrap().to_string();
    for _ in 0..200 {
        let (_, env) = call(&st, "GET", &format!("/sessions/{id}"), None).await;
        if env["status"] == "ready" {
            return;
        }
        tokio::time::sleep(std::time::Duration::from_millis(25)).await;
    }
    panic!("session {id} never became ready");
}

#[tokio::test]
async fn catalogues() {
    let st = state();
    let (_, metrics) = call(&st, "GET", "/metrics", None).await;
    assert_eq!(metrics.as_array().unwrap().len(), 11);
    assert!(metrics.as_array().unwrap().iter().any(|m| m["id"] == "frechet" && m["index_aligned"] == false));
    let (_, reps) = call(&st, "GET", "/representations", None).await;
    let ids: Vec<&str> = reps.as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["ja", "lte", "dmp"]);
}

#[tokio::test]
async fn persisted_sessions_are_reloaded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = || ServiceConfig { persist: Some(dir.path().to_path_buf()), workers: Some(2) };
    let st = AppState::new(cfg()).unwrap();
    let (_, created) = call(&st, "POST", "/sessions", Some(create_body("l_shape", 3))).await;
    let id = created["id"].as_str().unwrap().to_string();
    assert!(dir.path().join(format!("{id}.json")).exists());

    let fresh = AppState::new(cfg()).unwrap();
    let (code, env) = call(&fresh, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(env["session"], created["session"]);
}

#[tokio::test]
async fn http_and_cli_produce_identical_documents() {
    let dir = tempfile::tempdir().unwrap();
    let cli = Command::new(env!("CARGO_BIN_EXE_samlfd"))
        .args(["region", "--shape", "s_curve", "--metric", "dtw", "--resolution", "5", "--out", "cli.json"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(cli.status.success());
    let file = std::fs::read_to_string(dir.path().join("cli.json")).unwrap();

    let body = json!({
        "demo": shapes::s_curve(100),
        "config": { "metric": "dtw", "grid": { "resolution": 5 } }
    });
    let (_, env) = call(&state(), "POST", "/sessions", Some(body)).await;
    assert_eq!(serde_json::to_string_pretty(&env["session"]).unwrap(), file);

    // The same holds for a single reproduction.
    let cli = Command::new(env!("CARGO_BIN_EXE_samlfd"))
        .args(["reproduce", "--shape", "s_curve", "--metric", "dtw", "--init", "0.1,-0.05", "--json"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    let from_cli: Value = serde_json::from_slice(&cli.stdout).unwrap();
    let st = state();
    let (_, env) = call(&st, "POST", "/sessions", Some(json!({
        "demo": shapes::s_curve(100),
        "config": { "metric": "dtw", "grid": { "resolution": 2 } }
    })))
    .await;
    let uri = format!("/sessions/{}/reproduce", env["id"].as_str().unwrap());
    let (_, from_http) = call(&st, "POST", &uri, Some(json!({ "point": [0.1, -0.05] }))).await;
    assert_eq!(from_http, from_cli);
}
