use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pennies_service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(Arc::new(AppState::new(ServiceConfig::default()).unwrap()))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

fn new_game(opponent: Value, side: &str, seed: u64) -> Value {
    json!({
        "trail": {"kind": "finite", "lo": -3, "hi": 3},
        "human_side": side,
        "opponent": opponent,
        "seed": seed,
    })
}

async fn create(app: &Router, body: Value) -> String {
    let (status, v) = call(app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

async fn stake(app: &Router, id: &str, amount: f64) -> (StatusCode, Value) {
    call(app, Method::POST, &format!("/sessions/{id}/stake"), Some(json!({"amount": amount}))).await
}

#[tokio::test]
async fn create_and_read_a_session() {
    let app = app();
    let (status, v) = call(&app, Method::POST, "/sessions", Some(new_game(json!("nash"), "mina", 7))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["status"]["state"], "awaiting_stake");
    assert_eq!(v["turn"], 0);
    assert_eq!(v["opponent_name"], "nash");
    assert!(v.get("committed_bot_stake").is_none());
    let id = v["id"].as_str().unwrap();
    let (status, again) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(again, v);
}

#[tokio::test]
async fn history_grows_one_entry_per_turn() {
    let app = app();
    let id = create(&app, new_game(json!("nash"), "maxine", 11)).await;
    let mut turns = 0;
    for _ in 0..3 {
        let (status, v) = stake(&app, &id, 0.05).await;
        assert_eq!(status, StatusCode::OK);
        turns += 1;
        assert_eq!(v["session"]["history"].as_array().unwrap().len(), turns);
        if v["session"]["status"]["state"] == "finished" {
            break;
        }
    }
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(v["history"].as_array().unwrap().len(), turns);
    assert_eq!(v["turn"], turns);
}

#[tokio::test]
async fn bully_opens_with_epsilon() {
    let app = app();
    let opponent = json!({"kind": "bully", "epsilon": 0.001, "multiplier": 2.0});
    let id = create(&app, new_game(opponent, "mina", 1)).await;
    let (_, v) = stake(&app, &id, 0.0).await;
    assert_eq!(v["outcome"]["bot_stake"], 0.001);
}

#[tokio::test]
async fn error_statuses() {
    let app = app();
    let mut infinite = new_game(json!("zero"), "mina", 0);
    infinite["trail"] = json!({"kind": "infinite"});
    assert_eq!(call(&app, Method::POST, "/sessions", Some(infinite)).await.0, StatusCode::UNPROCESSABLE_ENTITY);

    let mut bad_boundary = new_game(json!("zero"), "mina", 0);
    bad_boundary["boundary"] =
        json!({"m_minus_inf": 1.0, "m_plus_inf": 0.0, "n_minus_inf": 1.0, "n_plus_inf": 0.0, "m_star": 0.0, "n_star": 0.0});
    let (status, body) = call(&app, Method::POST, "/sessions", Some(bad_boundary)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().is_some());

    assert_eq!(stake(&app, "missing", 0.0).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, Method::GET, "/sessions/missing", None).await.0, StatusCode::NOT_FOUND);

    let id = create(&app, new_game(json!("zero"), "maxine", 0)).await;
    assert_eq!(stake(&app, &id, -1.0).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(stake(&app, &id, 1e7).await.0, StatusCode::BAD_REQUEST);
    // A positive stake against zero always wins, so three turns finish.
    for _ in 0..3 {
        assert_eq!(stake(&app, &id, 0.01).await.0, StatusCode::OK);
    }
    let (status, _) = stake(&app, &id, 0.01).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(v["status"]["terminal"], "maxine_win");
}

#[tokio::test]
async fn opponents_catalogue() {
    let (status, v) = call(&app(), Method::GET, "/opponents", None).await;
    assert_eq!(status, StatusCode::OK);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|o| o["name"].as_str().unwrap()).collect();
    for name in ["nash", "zero", "tit_for_tat", "bully"] {
        assert!(names.contains(&name));
    }
}

#[tokio::test]
async fn cors_headers() {
    let app = app();
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/sessions")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .header(header::ACCESS_CONTROL_REQUEST_HEADERS, "content-type")
        .body(Body::empty())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert!(resp.status().is_success());
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
    let req = Request::builder()
        .uri("/opponents")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}

#[tokio::test]
async fn bot_stake_ignores_the_concurrent_human_stake() {
    // Two sessions with one seed share a history up to turn t and then
    // differ only in the human stake at t; the bot stakes at t agree.
    let app = app();
    for opponent in [json!("nash"), json!("bully"), json!("tit_for_tat")] {
        for t in 1..=4 {
            let body = new_game(opponent.clone(), "maxine", 2024);
            let (left, right) = (create(&app, body.clone()).await, create(&app, body).await);
            let mut finished = false;
            for _ in 1..t {
                let (_, a) = stake(&app, &left, 0.02).await;
                let (_, b) = stake(&app, &right, 0.02).await;
                assert_eq!(a["outcome"], b["outcome"]);
                finished = a["session"]["status"]["state"] == "finished";
                if finished {
                    break;
                }
            }
            if finished {
                continue;
            }
            let (_, a) = stake(&app, &left, 0.0).await;
            let (_, b) = stake(&app, &right, 5.0).await;
            assert_eq!(a["outcome"]["bot_stake"], b["outcome"]["bot_stake"], "{opponent} turn {t}");
        }
    }
}

#[tokio::test]
async fn ten_stakes_keep_the_accounting_identity() {
    let app = app();
    let id = create(&app, new_game(json!("nash"), "mina", 31)).await;
    let mut last = Value::Null;
    for _ in 0..10 {
        let (status, v) = stake(&app, &id, 0.08).await;
        if status == StatusCode::CONFLICT {
            break;
        }
        last = v["session"].clone();
    }
    let history = last["history"].as_array().unwrap();
    let human: f64 = history.iter().map(|t| t["human_stake"].as_f64().unwrap()).sum();
    let bot: f64 = history.iter().map(|t| t["bot_stake"].as_f64().unwrap()).sum();
    assert_eq!(last["costs"]["mina"].as_f64().unwrap(), human);
    assert!((last["costs"]["maxine"].as_f64().unwrap() - bot).abs() <= 1e-15);
    if last["status"]["state"] == "finished" {
        let receipts = &last["status"]["receipts"];
        let payoffs = &last["status"]["payoffs"];
        assert_eq!(payoffs[0].as_f64().unwrap(), receipts[0].as_f64().unwrap() - last["costs"]["maxine"].as_f64().unwrap());
        assert_eq!(payoffs[1].as_f64().unwrap(), receipts[1].as_f64().unwrap() - last["costs"]["mina"].as_f64().unwrap());
    }
}

#[tokio::test]
async fn replay_is_deterministic() {
    let app = app();
    let body = new_game(json!("nash"), "maxine", 77);
    let (first, second) = (create(&app, body.clone()).await, create(&app, body).await);
    for amount in [0.1, 0.0, 0.3, 0.05, 0.2, 0.0] {
        let (sa, a) = stake(&app, &first, amount).await;
        let (sb, b) = stake(&app, &second, amount).await;
        assert_eq!(sa, sb);
        assert_eq!(a["outcome"], b["outcome"]);
    }
}

#[tokio::test]
async fn tit_for_tat_remembers_the_series() {
    let app = app();
    let mut body = new_game(json!("tit_for_tat"), "maxine", 5);
    body["series"] = json!("evening");
    let id = create(&app, body.clone()).await;
    let (_, v) = stake(&app, &id, 1.0).await;
    assert_eq!(v["outcome"]["bot_stake"], 0.0);
    while stake(&app, &id, 1.0).await.0 == StatusCode::OK {}
    let id = create(&app, body).await;
    let (_, v) = stake(&app, &id, 0.0).await;
    assert!(v["outcome"]["bot_stake"].as_f64().unwrap() > 0.0);
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig { persist_dir: Some(dir.path().to_path_buf()), ..ServiceConfig::default() };
    let first = router(Arc::new(AppState::new(config.clone()).unwrap()));
    let id = create(&first, new_game(json!("nash"), "mina", 3)).await;
    stake(&first, &id, 0.1).await;
    let (_, before) = call(&first, Method::GET, &format!("/sessions/{id}"), None).await;
    let second = router(Arc::new(AppState::new(config).unwrap()));
    let (status, after) = call(&second, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(before, after);
}
