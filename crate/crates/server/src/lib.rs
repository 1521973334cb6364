//! HTTP session service.
//!
//! A thin façade over [`Session`]: every mutating endpoint maps to exactly one
//! session command, and every response carries only public data. Each session
//! sits behind its own mutex so commands for one session are serialized while
//! different sessions run in parallel. The debug endpoint, which exposes
//! scores and volition breakdowns, exists only when the server was started
//! with debug enabled.

use std::collections::{BTreeMap, VecDeque};
use std::convert::Infallible;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::{watch, Mutex};

use socialsim_core::dsl::Diagnostic;
use socialsim_core::event::Event;
use socialsim_core::model::{CharacterId, Response as Choice};
use socialsim_core::scenarios;
use socialsim_core::session::{Session, SessionError};

/// Most ticks one request may advance.
pub const MAX_TICKS_PER_REQUEST: u64 = 1000;

/// Server-wide settings.
#[derive(Debug, Clone, Default)]
pub struct Config {
    /// Serve `/sessions/{id}/debug/state`.
    pub debug: bool,
    /// Scenario texts by id, for `scenario_id` in create requests.
    pub scenarios: BTreeMap<String, String>,
}

impl Config {
    /// The built-in scenarios only.
    pub fn builtin() -> Config {
        let scenarios = scenarios::ALL.iter().map(|(id, text)| (id.to_string(), text.to_string())).collect();
        Config { debug: false, scenarios }
    }

    /// Adds every `*.social` file in `dir`, keyed by file stem. A file named
    /// like a built-in scenario replaces it.
    pub fn load_dir(&mut self, dir: &Path) -> std::io::Result<usize> {
        let mut n = 0;
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "social") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    self.scenarios.insert(stem.to_string(), std::fs::read_to_string(&path)?);
                    n += 1;
                }
            }
        }
        Ok(n)
    }
}

struct Slot {
    session: Mutex<Session>,
    /// Last seq written, for waking stream readers.
    seq: watch::Sender<u64>,
}

impl Slot {
    fn publish(&self, session: &Session) {
        self.seq.send_replace(session.last_seq());
    }
}

struct AppState {
    config: Config,
    sessions: RwLock<BTreeMap<String, Arc<Slot>>>,
    next_id: AtomicU64,
}

impl AppState {
    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions
            .read()
            .expect("session map lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))
    }
}

/// Builds the application router.
pub fn router(config: Config) -> Router {
    let state = Arc::new(AppState { config, sessions: RwLock::new(BTreeMap::new()), next_id: AtomicU64::new(1) });
    Router::new()
        .route("/scenarios", get(list_scenarios))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/debug/state", get(get_debug_state))
        .route("/sessions/{id}/tick", post(tick))
        .route("/sessions/{id}/player/initiate", post(initiate))
        .route("/sessions/{id}/player/respond", post(respond))
        .route("/sessions/{id}/player/move", post(move_player))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/events/stream", get(stream))
        .with_state(state)
}

// --- errors -----------------------------------------------------------------

#[derive(Debug)]
pub enum ApiError {
    UnknownSession(String),
    DebugDisabled,
    InvalidScenario(Vec<Diagnostic>),
    UnknownScenario(String),
    BadRequest(String),
    Session(SessionError),
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::InvalidScenario(d) => ApiError::InvalidScenario(d),
            other => ApiError::Session(other),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

/// Status and machine-readable code for a session command failure.
fn session_error_status(e: &SessionError) -> (StatusCode, &'static str) {
    match e {
        SessionError::AwaitingPlayer(_) => (StatusCode::CONFLICT, "awaiting_player"),
        SessionError::NoPendingPrompt => (StatusCode::CONFLICT, "no_pending_prompt"),
        SessionError::WrongQuest { .. } => (StatusCode::BAD_REQUEST, "wrong_quest"),
        SessionError::UnknownExchange(_) => (StatusCode::BAD_REQUEST, "unknown_exchange"),
        SessionError::UnknownCharacter(_) => (StatusCode::BAD_REQUEST, "unknown_character"),
        SessionError::UnknownLocation(_) => (StatusCode::BAD_REQUEST, "unknown_location"),
        SessionError::NotCoLocated { .. } => (StatusCode::BAD_REQUEST, "same_area"),
        SessionError::PreconditionFailed(_) => (StatusCode::BAD_REQUEST, "precondition_failed"),
        SessionError::InvalidRoles(_) => (StatusCode::BAD_REQUEST, "invalid_roles"),
        SessionError::Model(_) => (StatusCode::BAD_REQUEST, "invalid_action"),
        SessionError::InvalidScenario(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_scenario"),
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::UnknownSession(id) => {
                (StatusCode::NOT_FOUND, json!({"error": "unknown_session", "message": format!("no session {id}")}))
            }
            ApiError::DebugDisabled => (
                StatusCode::FORBIDDEN,
                json!({"error": "debug_disabled", "message": "start the server with --debug to see private state"}),
            ),
            ApiError::InvalidScenario(diagnostics) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": "invalid_scenario", "message": "scenario has errors", "diagnostics": diagnostics}),
            ),
            ApiError::UnknownScenario(id) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": "unknown_scenario", "message": format!("no scenario {id}"), "diagnostics": []}),
            ),
            ApiError::BadRequest(message) => {
                (StatusCode::BAD_REQUEST, json!({"error": "bad_request", "message": message}))
            }
            ApiError::Session(e) => {
                let (status, code) = session_error_status(&e);
                let mut body = json!({"error": code, "message": e.to_string()});
                match &e {
                    SessionError::PreconditionFailed(lit) => body["precondition"] = json!(lit),
                    SessionError::AwaitingPlayer(q) => body["quest"] = json!(q),
                    SessionError::WrongQuest { pending, .. } => body["quest"] = json!(pending),
                    _ => {}
                }
                (status, body)
            }
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

// --- bodies -----------------------------------------------------------------

#[derive(Debug, Deserialize)]
pub struct CreateBody {
    pub scenario_text: Option<String>,
    pub scenario_id: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
pub struct TickBody {
    #[serde(default = "one")]
    pub count: u64,
    pub since: Option<u64>,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Deserialize)]
pub struct InitiateBody {
    pub exchange: String,
    pub target: CharacterId,
    pub subject: Option<CharacterId>,
    pub since: Option<u64>,
}

#[derive(Debug, Deserialize)]
pub struct RespondBody {
    pub quest_id: u64,
    pub choice: Choice,
    pub since: Option<u64>,
}

#[derive(Debug, Deserialize)]
pub struct MoveBody {
    pub location: String,
    pub since: Option<u64>,
}

#[derive(Debug, Deserialize)]
pub struct EventsQuery {
    #[serde(default)]
    pub since: u64,
    pub limit: Option<usize>,
}

fn public(events: &[Event]) -> Vec<Value> {
    events.iter().map(Event::public_view).collect()
}

/// The reply to a command: the public events after `since` (by default,
/// those the command produced) and where the session now stands.
fn delta(session: &Session, since: u64) -> Value {
    json!({
        "events": public(session.events_since(since)),
        "last_seq": session.last_seq(),
        "tick": session.current_tick(),
        "awaiting_player": session.pending_prompt().map(|q| q.id),
    })
}

// --- handlers ---------------------------------------------------------------

async fn list_scenarios(State(app): State<Arc<AppState>>) -> Json<Value> {
    Json(json!({"scenarios": app.config.scenarios.keys().collect::<Vec<_>>()}))
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Result<Json<CreateBody>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let Json(body) = body?;
    let text = match (body.scenario_text, body.scenario_id) {
        (Some(text), None) => text,
        (None, Some(id)) => app.config.scenarios.get(&id).cloned().ok_or(ApiError::UnknownScenario(id))?,
        _ => return Err(ApiError::BadRequest("give exactly one of scenario_text and scenario_id".into())),
    };
    let session = Session::from_text(&text, body.seed)?;
    let id = format!("s{}", app.next_id.fetch_add(1, Ordering::Relaxed));
    let (seq, _) = watch::channel(session.last_seq());
    let last_seq = session.last_seq();
    let slot = Arc::new(Slot { session: Mutex::new(session), seq });
    app.sessions.write().expect("session map lock poisoned").insert(id.clone(), slot);
    Ok((StatusCode::CREATED, Json(json!({"session_id": id, "last_seq": last_seq}))))
}

async fn get_state(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let slot = app.slot(&id)?;
    let session = slot.session.lock().await;
    Ok(Json(serde_json::to_value(session.projection()).expect("projection serializes")))
}

async fn get_debug_state(State(app): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    if !app.config.debug {
        return Err(ApiError::DebugDisabled);
    }
    let slot = app.slot(&id)?;
    let session = slot.session.lock().await;
    Ok(Json(serde_json::to_value(session.debug_state()).expect("debug state serializes")))
}

async fn tick(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<TickBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let slot = app.slot(&id)?;
    let Json(body) = body?;
    if body.count > MAX_TICKS_PER_REQUEST {
        return Err(ApiError::BadRequest(format!("count may be at most {MAX_TICKS_PER_REQUEST}")));
    }
    let mut session = slot.session.lock().await;
    let since = body.since.unwrap_or(session.last_seq());
    if let Some(q) = session.pending_prompt() {
        return Err(SessionError::AwaitingPlayer(q.id).into());
    }
    session.run_ticks(body.count)?;
    slot.publish(&session);
    Ok(Json(delta(&session, since)))
}

async fn initiate(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<InitiateBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let slot = app.slot(&id)?;
    let Json(body) = body?;
    let mut session = slot.session.lock().await;
    let since = body.since.unwrap_or(session.last_seq());
    let position = session.player_initiate(&body.exchange, &body.target, body.subject.as_ref())?;
    slot.publish(&session);
    let mut reply = delta(&session, since);
    reply["queue_position"] = json!(position);
    Ok(Json(reply))
}

async fn respond(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<RespondBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let slot = app.slot(&id)?;
    let Json(body) = body?;
    let mut session = slot.session.lock().await;
    let since = body.since.unwrap_or(session.last_seq());
    session.player_respond(body.quest_id, body.choice)?;
    slot.publish(&session);
    Ok(Json(delta(&session, since)))
}

async fn move_player(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<MoveBody>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let slot = app.slot(&id)?;
    let Json(body) = body?;
    let mut session = slot.session.lock().await;
    let since = body.since.unwrap_or(session.last_seq());
    session.player_move(&body.location)?;
    slot.publish(&session);
    Ok(Json(delta(&session, since)))
}

async fn events(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    query: Result<Query<EventsQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let slot = app.slot(&id)?;
    let Query(query) = query?;
    let session = slot.session.lock().await;
    let all = session.events_since(query.since);
    let page = &all[..query.limit.map_or(all.len(), |n| n.min(all.len()))];
    Ok(Json(json!({
        "events": public(page),
        "last_seq": session.last_seq(),
        "more": page.len() < all.len(),
    })))
}

/// Server-sent events: every public event after `since` (or the
/// `Last-Event-ID` header on reconnect), then new ones as they are written.
async fn stream(
    State(app): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    query: Result<Query<EventsQuery>, QueryRejection>,
) -> ApiResult<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>> {
    let slot = app.slot(&id)?;
    let Query(query) = query?;
    let resume = headers.get("last-event-id").and_then(|v| v.to_str().ok()).and_then(|v| v.parse::<u64>().ok());
    let cursor = resume.unwrap_or(query.since);
    let rx = slot.seq.subscribe();
    let state = (slot, rx, cursor, VecDeque::<Event>::new());
    let events = futures::stream::unfold(state, |(slot, mut rx, mut cursor, mut buffer)| async move {
        loop {
            if let Some(e) = buffer.pop_front() {
                let frame = SseEvent::default()
                    .id(e.seq.to_string())
                    .event(e.body.kind())
                    .data(e.public_view().to_string());
                return Some((Ok(frame), (slot, rx, cursor, buffer)));
            }
            rx.mark_unchanged();
            {
                let session = slot.session.lock().await;
                buffer.extend(session.events_since(cursor).iter().cloned());
            }
            if let Some(last) = buffer.back() {
                cursor = last.seq;
                continue;
            }
            rx.changed().await.ok()?;
        }
    });
    Ok(Sse::new(events).keep_alive(KeepAlive::default()))
}
