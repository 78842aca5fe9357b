use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use lcri::service::{router, AppState, ServiceConfig};

const POW: &str = include_str!("../../../problems/pow.lctrs");

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn call_json(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Value) {
    let (s, text) = call(app, method, uri, body).await;
    (s, serde_json::from_str(&text).unwrap_or(Value::Null))
}

async fn start(app: &Router) -> String {
    let (s, v) = call_json(
        app,
        "POST",
        "/sessions",
        Some(json!({ "problemText": POW })),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn pow_inequality_over_the_api() {
    let app = router(AppState::new(ServiceConfig::default()));
    let id = start(&app).await;
    let (_, v) = call_json(&app, "GET", &format!("/sessions/{}", id), None).await;
    let eq = &v["state"]["equations"][0];
    assert_eq!(eq["index"], 0);
    assert_eq!(eq["binderVars"], json!(["m"]));
    assert_eq!(eq["binderGuard"], "m >= 0");
    assert_eq!(eq["lhs"], "pow(x, n)");
    assert_eq!(eq["guard"], "x = 2 /\\ n >= 0");
    assert_eq!(v["state"]["status"], "open");

    let (_, moves) = call_json(&app, "GET", &format!("/sessions/{}/moves", id), None).await;
    let root = moves
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["move"] == "expansion eq=0 orient=l2r pos=ε")
        .expect("root expansion listed");
    assert_eq!(root["applicable"], true);
    assert_eq!(root["termination"]["outcome"], "terminating");

    let apply = format!("/sessions/{}/apply", id);
    for mv in [
        "expansion eq=0 orient=l2r pos=ε",
        "deletion eq=1",
        "simplification eq=2 side=l pos=2.2 rule=calc:sub",
        "simplification eq=2 side=l pos=2 rule=H1",
        "deletion eq=2",
    ] {
        let (s, v) = call_json(&app, "POST", &apply, Some(json!({ "move": mv }))).await;
        assert_eq!(s, StatusCode::OK, "{} {}", mv, v);
    }
    let (_, v) = call_json(&app, "GET", &format!("/sessions/{}", id), None).await;
    assert_eq!(v["state"]["equations"], json!([]));
    assert_eq!(v["state"]["status"], "proved");
    assert_eq!(v["state"]["hypotheses"][0]["id"], "H1");

    let (s, text) = call(&app, "GET", &format!("/sessions/{}/transcript", id), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(text.lines().count(), 5);
}

#[tokio::test]
async fn premature_deletion_is_a_conflict() {
    let app = router(AppState::new(ServiceConfig::default()));
    let id = start(&app).await;
    let apply = format!("/sessions/{}/apply", id);
    call_json(
        &app,
        "POST",
        &apply,
        Some(json!({ "move": "expansion eq=0 orient=l2r pos=ε" })),
    )
    .await;
    let (s, v) = call_json(
        &app,
        "POST",
        &apply,
        Some(json!({ "move": "deletion eq=2" })),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);
    let verdicts = v["verdicts"].as_array().unwrap();
    let last = verdicts.last().unwrap();
    assert_eq!(last["condition"], "valid theory equation");
    assert_eq!(last["verdict"]["outcome"], "invalid");
    assert_eq!(verdicts[1]["verdict"]["outcome"], "sat");

    let (s, _) = call_json(
        &app,
        "POST",
        &apply,
        Some(json!({ "move": "deletion eq=9" })),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = call_json(&app, "POST", &apply, Some(json!({ "move": "bogus eq=1" }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn undo_auto_and_errors() {
    let app = router(AppState::new(ServiceConfig::default()));
    let id = start(&app).await;
    let (s, _) = call_json(&app, "POST", &format!("/sessions/{}/undo", id), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, v) = call_json(
        &app,
        "POST",
        &format!("/sessions/{}/auto", id),
        Some(json!({ "budget": 1 })),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["applied"], 1);
    let (_, v) = call_json(&app, "POST", &format!("/sessions/{}/undo", id), None).await;
    assert_eq!(v["state"]["equations"].as_array().unwrap().len(), 1);
    let (_, v) = call_json(
        &app,
        "POST",
        &format!("/sessions/{}/auto", id),
        Some(json!({ "budget": 20 })),
    )
    .await;
    assert_eq!(v["state"]["status"], "proved");
    assert_eq!(v["transcript"].as_str().unwrap().lines().count(), 5);

    let (s, _) = call_json(&app, "GET", "/sessions/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call_json(&app, "GET", "/sessions/nope/moves", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, v) = call_json(
        &app,
        "POST",
        "/sessions",
        Some(json!({ "problemText": "RULES\n f(x -> 1\n" })),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["line"], 2);

    let other = start(&app).await;
    assert_ne!(other, id);
}
