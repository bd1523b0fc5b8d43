use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use dyncaus_core::hierarchy::catalog;
use dyncaus_core::textio::render_structure;
use dyncaus_core::{Dces, EventId, Structure};
use dyncaus_service::{router, AppState};
use http_body_util::BodyExt;
use proptest::prelude::*;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Body>, json_body: bool) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if json_body {
        req = req.header("content-type", "application/json");
    }
    let res = app.clone().oneshot(req.body(body.unwrap_or_else(Body::empty)).unwrap()).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (s, b) = call(app, Method::GET, uri, None, false).await;
    (s, serde_json::from_str(&b).unwrap())
}

async fn post_json(app: &Router, uri: &str, v: Value) -> (StatusCode, Value) {
    let (s, b) = call(app, Method::POST, uri, Some(Body::from(v.to_string())), true).await;
    (s, serde_json::from_str(&b).unwrap())
}

async fn post_text(app: &Router, uri: &str, text: &str) -> (StatusCode, Value) {
    let (s, b) = call(app, Method::POST, uri, Some(Body::from(text.to_string())), false).await;
    (s, serde_json::from_str(&b).unwrap())
}

async fn store(app: &Router, s: &Structure) -> String {
    let (status, body) = post_text(app, "/structures", &render_structure(s)).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["id"].as_str().unwrap().to_string()
}

async fn open(app: &Router, s: &Structure) -> String {
    let id = store(app, s).await;
    let (status, body) = post_json(app, "/sessions", json!({ "structure_id": id })).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["id"].as_str().unwrap().to_string()
}

async fn step(app: &Router, session: &str, event: &str) -> (StatusCode, Value) {
    post_json(app, &format!("/sessions/{session}/step"), json!({ "event": event })).await
}

fn pairs(v: &Value) -> Vec<(String, String)> {
    serde_json::from_value(v.clone()).unwrap()
}

fn p(a: &str, b: &str) -> (String, String) {
    (a.to_string(), b.to_string())
}

fn farm() -> Structure {
    catalog::farm().into()
}

#[tokio::test]
async fn structures_round_trip() {
    let app = router(AppState::new());
    let id = store(&app, &farm()).await;
    let (status, body) = get(&app, &format!("/structures/{id}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["kind"], "dces");
    assert_eq!(body["text"], render_structure(&farm()));
    let (status, _) = get(&app, "/structures/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn malformed_text_reports_its_position() {
    let app = router(AppState::new());
    let (status, body) = post_text(&app, "/structures", "kind dces;\nevents a b;\ncause a -> ;\n").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["line"], 3);
    assert!(body["col"].as_u64().is_some());
}

#[tokio::test]
async fn invalid_structure_names_the_condition() {
    let app = router(AppState::new());
    // dropping a dependency that neither exists nor is added
    let text = "kind dces;\nevents a b c;\ndrop c : (a -> b);\n";
    let (status, body) = post_text(&app, "/structures", text).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("Condition 1"), "{body}");
    assert_eq!(body["violations"][0]["condition"], 1);
}

#[tokio::test]
async fn graph_export() {
    let app = router(AppState::new());
    let id = store(&app, &catalog::fig9().into()).await;
    let (status, body) = get(&app, &format!("/structures/{id}/graph?format=json&steps=single")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body["nodes"].as_array().unwrap().iter().all(|n| n.get("caus").is_some()));
    let (status, dot) = call(&app, Method::GET, &format!("/structures/{id}/graph?format=dot"), None, false).await;
    assert_eq!(status, StatusCode::OK);
    assert!(dot.starts_with("digraph transitions {"));
    let (status, _) = get(&app, &format!("/structures/{id}/graph?format=png")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn fresh_session_starts_at_the_initial_state() {
    let app = router(AppState::new());
    let s = open(&app, &farm()).await;
    let (status, body) = get(&app, &format!("/sessions/{s}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["config"], json!([]));
    assert_eq!(pairs(&body["caus"]), vec![p("plant", "harvest"), p("plow", "plant"), p("water", "plant")]);
    assert_eq!(body["history"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn rain_drops_the_need_to_water() {
    let app = router(AppState::new());
    let s = open(&app, &farm()).await;
    step(&app, &s, "plow").await;
    let (status, body) = step(&app, &s, "rain").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(pairs(&body["delta"]["dropped"]), vec![p("water", "plant")]);
    assert!(body["enabled"].as_array().unwrap().contains(&json!("plant")));
}

#[tokio::test]
async fn whatif_previews_without_committing() {
    let app = router(AppState::new());
    let s = open(&app, &farm()).await;
    let (_, before) = get(&app, &format!("/sessions/{s}")).await;
    let (status, body) = get(&app, &format!("/sessions/{s}/whatif?event=pest_infestation")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(pairs(&body["delta"]["added"]), vec![p("pest_control", "harvest")]);
    let (_, after) = get(&app, &format!("/sessions/{s}")).await;
    assert_eq!(before, after);
}

#[tokio::test]
async fn late_disabler_keeps_target_enabled() {
    let app = router(AppState::new());
    let s = open(&app, &catalog::fig9().into()).await;
    step(&app, &s, "a").await;
    let (status, body) = step(&app, &s, "d").await;
    assert_eq!(status, StatusCode::OK);
    assert!(body["enabled"].as_array().unwrap().contains(&json!("t")), "{body}");
}

#[tokio::test]
async fn rejected_steps_conflict() {
    let app = router(AppState::new());
    let s = open(&app, &farm()).await;
    assert_eq!(step(&app, &s, "plow").await.0, StatusCode::OK);
    let (status, body) = step(&app, &s, "plow").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(body["condition"].as_u64().is_some());
    let (status, _) = step(&app, &s, "harvest").await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = step(&app, &s, "tractor").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = step(&app, "missing", "plow").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn undo_restores_the_previous_state() {
    let app = router(AppState::new());
    let s = open(&app, &farm()).await;
    let (_, initial) = get(&app, &format!("/sessions/{s}")).await;
    let (status, _) = post_json(&app, &format!("/sessions/{s}/undo"), json!({})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    step(&app, &s, "rain").await;
    let (status, body) = post_json(&app, &format!("/sessions/{s}/undo"), json!({})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["caus"], initial["caus"]);
    let (_, now) = get(&app, &format!("/sessions/{s}")).await;
    assert_eq!(now, initial);
}

#[tokio::test]
async fn static_families_have_no_sessions() {
    let app = router(AppState::new());
    let id = store(&app, &catalog::fig3a().into()).await;
    let (status, _) = post_json(&app, "/sessions", json!({ "structure_id": id })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = post_json(&app, "/sessions", json!({ "structure_id": "none" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    // shrinking causality runs through its embedding
    open(&app, &catalog::sigma_xi().into()).await;
}

#[tokio::test]
async fn journal_replays_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("journal.jsonl");
    let app = router(AppState::with_journal(&path).unwrap());
    let s = open(&app, &farm()).await;
    for e in ["plow", "rain", "pest_infestation"] {
        step(&app, &s, e).await;
    }
    post_json(&app, &format!("/sessions/{s}/undo"), json!({})).await;
    step(&app, &s, "plant").await;
    let (_, before) = get(&app, &format!("/sessions/{s}")).await;
    drop(app);

    let again = router(AppState::with_journal(&path).unwrap());
    let (status, after) = get(&again, &format!("/sessions/{s}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(before, after);
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 7);
}

/// Fires `picks` (modulo the enabled events) and compares the session with
/// the pure kernel.
async fn replay_matches(picks: Vec<usize>) {
    let d: Dces = catalog::farm();
    let app = router(AppState::new());
    let s = open(&app, &d.clone().into()).await;
    for i in picks {
        let (_, now) = get(&app, &format!("/sessions/{s}")).await;
        let enabled = now["enabled"].as_array().unwrap().clone();
        if enabled.is_empty() {
            break;
        }
        let e = enabled[i % enabled.len()].as_str().unwrap().to_string();
        let (_, w) = get(&app, &format!("/sessions/{s}/whatif?event={e}")).await;
        let (status, body) = step(&app, &s, &e).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(w, body);
    }
    let (_, body) = get(&app, &format!("/sessions/{s}")).await;
    let fired: Vec<EventId> = serde_json::from_value(body["fired"].clone()).unwrap();
    let mut state = d.initial_state();
    for e in &fired {
        state = d.fire(&state, e).unwrap();
    }
    assert_eq!(serde_json::to_value(&state.config).unwrap(), body["config"]);
    assert_eq!(serde_json::to_value(&state.caus).unwrap(), body["caus"]);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn replaying_fired_events_reproduces_the_state(picks in prop::collection::vec(0..7usize, 0..8)) {
        tokio::runtime::Builder::new_current_thread().build().unwrap().block_on(replay_matches(picks));
    }
}
