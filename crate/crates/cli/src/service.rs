//! JSON-over-HTTP proof sessions.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | POST | `/sessions` | `{problemText, assumeTerminating?}` | `{id, digest, state}` |
//! | GET | `/sessions/{id}` | | `{id, state}` |
//! | GET | `/sessions/{id}/moves` | | `[{move, kind, applicable, blockedBy?, verdicts, termination?}]` |
//! | POST | `/sessions/{id}/apply` | `{move}` | `{state, notes, verdicts}` or 409 `{reason, verdicts}` |
//! | POST | `/sessions/{id}/undo` | | `{state}` |
//! | POST | `/sessions/{id}/auto` | `{budget}` | `{state, transcript, applied}` |
//! | GET | `/sessions/{id}/transcript` | | transcript as text |
//!
//! Unknown sessions give 404, inapplicable moves 409, and malformed
//! problems or moves 422.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use lcri_core::ri::session::{Session, SessionError};
use lcri_core::ri::{Engine, Move, MoveError, RiState};
use lcri_core::syntax::parse_problem;
use lcri_core::Solver;

/// Options shared by all sessions of a service.
#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub smt_command: Option<String>,
}

struct Entry {
    session: Session,
}

#[derive(Default)]
struct Registry {
    config: ServiceConfig,
    next: AtomicU64,
    sessions: Mutex<HashMap<String, Arc<Mutex<Entry>>>>,
}

#[derive(Clone, Default)]
pub struct AppState(Arc<Registry>);

impl AppState {
    pub fn new(config: ServiceConfig) -> AppState {
        AppState(Arc::new(Registry {
            config,
            ..Registry::default()
        }))
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        self.0
            .sessions
            .lock()
            .expect("registry lock")
            .get(id)
            .cloned()
            .ok_or_else(|| {
                ApiError::new(
                    StatusCode::NOT_FOUND,
                    json!({ "reason": format!("no session {}", id) }),
                )
            })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/moves", get(moves))
        .route("/sessions/{id}/apply", post(apply))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/auto", post(auto))
        .route("/sessions/{id}/transcript", get(transcript))
        .with_state(state)
}

pub async fn serve(port: u16, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(config))).await
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, body: Value) -> ApiError {
        ApiError { status, body }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<MoveError> for ApiError {
    fn from(e: MoveError) -> ApiError {
        let status = match e {
            MoveError::Malformed(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::CONFLICT,
        };
        ApiError::new(
            status,
            json!({ "reason": e.to_string(), "verdicts": e.evidence() }),
        )
    }
}

/// The JSON form of a session state.
pub fn state_json(session: &Session) -> Value {
    let st: &RiState = session.state();
    let equations: Vec<Value> = st
        .equations
        .iter()
        .map(|e| {
            json!({
                "index": e.id,
                "binderVars": e.eq.binder.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "binderGuard": e.eq.eta.to_string(),
                "lhs": e.eq.lhs.to_string(),
                "rhs": e.eq.rhs.to_string(),
                "guard": e.eq.guard.to_string(),
                "text": e.eq.to_string(),
            })
        })
        .collect();
    let hypotheses: Vec<Value> = st
        .hypotheses
        .iter()
        .map(|h| {
            json!({
                "id": h.id,
                "lhs": h.lhs.to_string(),
                "rhs": h.rhs.to_string(),
                "guard": h.guard.to_string(),
                "text": h.to_string(),
            })
        })
        .collect();
    json!({
        "equations": equations,
        "hypotheses": hypotheses,
        "status": session.status(),
    })
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct CreateBody {
    problem_text: String,
    #[serde(default)]
    assume_terminating: bool,
}

async fn create(
    State(app): State<AppState>,
    Json(body): Json<CreateBody>,
) -> Result<Json<Value>, ApiError> {
    let unprocessable = |v: Value| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, v);
    let problem = parse_problem(&body.problem_text).map_err(|e| {
        unprocessable(json!({ "reason": e.to_string(), "line": e.line, "column": e.col }))
    })?;
    let goals = problem
        .goal_equations()
        .map_err(|e| unprocessable(json!({ "reason": e.to_string() })))?;
    let solver = match &app.0.config.smt_command {
        Some(cmd) => Solver::with_smt(cmd),
        None => Solver::builtin(),
    };
    let engine =
        Engine::new(&problem.system(), solver).with_assumed_termination(body.assume_terminating);
    let session = Session::new(Arc::new(engine), goals);
    let mut h = DefaultHasher::new();
    body.problem_text.hash(&mut h);
    let digest = format!("{:016x}", h.finish());
    let id = format!("s{}", app.0.next.fetch_add(1, Ordering::Relaxed) + 1);
    let reply = json!({ "id": id, "digest": digest, "state": state_json(&session) });
    app.0
        .sessions
        .lock()
        .expect("registry lock")
        .insert(id, Arc::new(Mutex::new(Entry { session })));
    Ok(Json(reply))
}

async fn show(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let entry = app.get(&id)?;
    let e = entry.lock().expect("session lock");
    Ok(Json(json!({ "id": id, "state": state_json(&e.session) })))
}

async fn moves(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let entry = app.get(&id)?;
    let e = entry.lock().expect("session lock");
    let list: Vec<Value> = e
        .session
        .engine()
        .moves(e.session.state())
        .into_iter()
        .map(|m| {
            let mut v = json!({
                "move": m.mv.to_string(),
                "kind": m.mv.kind(),
                "applicable": m.applicable,
                "verdicts": m.evidence,
            });
            if let Some(b) = m.blocked_by {
                v["blockedBy"] = json!(b);
            }
            if let Some(t) = m.termination {
                v["termination"] = json!({ "outcome": t.outcome, "text": t.to_string() });
            }
            v
        })
        .collect();
    Ok(Json(Value::Array(list)))
}

#[derive(Deserialize)]
struct ApplyBody {
    #[serde(rename = "move")]
    mv: String,
}

async fn apply(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<ApplyBody>,
) -> Result<Json<Value>, ApiError> {
    let entry = app.get(&id)?;
    let mut e = entry.lock().expect("session lock");
    let mv: Move = body.mv.parse()?;
    let record = e.session.apply(&mv)?.clone();
    Ok(Json(json!({
        "state": state_json(&e.session),
        "move": record.mv.to_string(),
        "notes": record.notes,
        "verdicts": record.evidence,
    })))
}

async fn undo(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    let entry = app.get(&id)?;
    let mut e = entry.lock().expect("session lock");
    match e.session.undo() {
        Ok(rec) => Ok(Json(
            json!({ "state": state_json(&e.session), "undone": rec.mv.to_string() }),
        )),
        Err(err @ SessionError::EmptyHistory) | Err(err @ SessionError::Replay { .. }) => Err(
            ApiError::new(StatusCode::CONFLICT, json!({ "reason": err.to_string() })),
        ),
    }
}

#[derive(Deserialize)]
struct AutoBody {
    budget: usize,
}

async fn auto(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<AutoBody>,
) -> Result<Json<Value>, ApiError> {
    let entry = app.get(&id)?;
    let mut e = entry.lock().expect("session lock");
    let applied = e.session.auto(body.budget);
    Ok(Json(json!({
        "state": state_json(&e.session),
        "transcript": e.session.transcript(),
        "applied": applied,
    })))
}

async fn transcript(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let entry = app.get(&id)?;
    let e = entry.lock().expect("session lock");
    Ok((
        [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
        e.session.transcript(),
    )
        .into_response())
}
