//! HTTP API for storing structures and stepping dynamic causality sessions.
//!
//! Structures are immutable once stored. A session keeps the history of
//! states reached by firing single events; every mutation can be written to
//! an append-only journal of JSON lines and replayed on startup.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dyncaus_core::dynamic::{embed_ges, embed_ses, Delta};
use dyncaus_core::textio::{export_graph, parse_structure, render_structure, EsDocument, GraphFormat};
use dyncaus_core::{Dces, DcesState, Error, EventId, EventSet, Relation, StepMode, Structure};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// One journal line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Entry {
    Structure { id: String, text: String },
    Session { id: String, structure_id: String },
    Step { session: String, event: EventId },
    Undo { session: String },
}

struct Stored {
    structure: Structure,
    /// The structure sessions run on; absent for families without states.
    dynamic: Option<Arc<Dces>>,
}

/// Index 0 is the initial state; neighbours differ by one fired event.
struct Session {
    structure_id: String,
    dces: Arc<Dces>,
    history: Vec<DcesState>,
    fired: Vec<EventId>,
}

#[derive(Default)]
struct Inner {
    structures: RwLock<BTreeMap<String, Arc<Stored>>>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
    journal: Option<Mutex<File>>,
}

/// Shared, cheaply cloned server state.
#[derive(Clone, Default)]
pub struct AppState(Arc<Inner>);

/// An error with its HTTP status and JSON body.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl ToString) -> Self {
        ApiError { status, body: json!({ "error": message.to_string() }) }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown {what} {id}"))
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let mut body = json!({ "error": e.to_string() });
        let status = match &e {
            Error::StepRejected(c) => {
                body["condition"] = json!(c);
                StatusCode::CONFLICT
            }
            Error::Invalid(v) => {
                body["violations"] = json!(v.0);
                StatusCode::BAD_REQUEST
            }
            _ => StatusCode::BAD_REQUEST,
        };
        if let Some((line, col)) = e.position() {
            body["line"] = json!(line);
            body["col"] = json!(col);
        }
        ApiError { status, body }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

/// Current state of a session as sent to clients. `delta` compares with
/// the previous state and is empty at the initial state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub config: EventSet,
    pub caus: Relation,
    pub enabled: Vec<EventId>,
    pub delta: Delta,
}

fn summary(dces: &Dces, before: Option<&DcesState>, now: &DcesState) -> ApiResult<Summary> {
    Ok(Summary {
        config: now.config.clone(),
        caus: now.caus.clone(),
        enabled: dces.enabled_steps(now)?.into_keys().collect(),
        delta: before.map(|b| Delta::between(b, now)).unwrap_or_default(),
    })
}

impl Session {
    fn current(&self) -> &DcesState {
        self.history.last().expect("history starts with the initial state")
    }

    fn summary(&self) -> ApiResult<Summary> {
        let n = self.history.len();
        let before = n.checked_sub(2).map(|i| &self.history[i]);
        summary(&self.dces, before, self.current())
    }

    fn step(&mut self, event: &EventId) -> ApiResult<Summary> {
        let next = self.dces.fire(self.current(), event)?;
        self.history.push(next);
        self.fired.push(event.clone());
        self.summary()
    }

    fn undo(&mut self) -> ApiResult<Summary> {
        if self.history.len() == 1 {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "nothing to undo at the initial state"));
        }
        self.history.pop();
        self.fired.pop();
        self.summary()
    }
}

fn token() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

fn event_id(name: &str) -> ApiResult<EventId> {
    EventId::new(name).map_err(ApiError::from)
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replays the journal at `path`, if any, and appends later mutations
    /// to it.
    pub fn with_journal(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref();
        let state = AppState::new();
        if path.exists() {
            for (n, line) in BufReader::new(File::open(path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: Entry = serde_json::from_str(&line)
                    .map_err(|e| std::io::Error::other(format!("journal line {}: {e}", n + 1)))?;
                state
                    .apply(&entry)
                    .map_err(|e| std::io::Error::other(format!("journal line {}: {}", n + 1, e.body)))?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut state = state;
        Arc::get_mut(&mut state.0).expect("not shared yet").journal = Some(Mutex::new(file));
        Ok(state)
    }

    fn record(&self, entry: &Entry) -> ApiResult<()> {
        if let Some(j) = &self.0.journal {
            let line = serde_json::to_string(entry).expect("entries serialize");
            let mut f = j.lock().expect("journal lock");
            writeln!(f, "{line}").map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))?;
        }
        Ok(())
    }

    /// Applies a mutation without journaling it.
    fn apply(&self, entry: &Entry) -> ApiResult<Option<Summary>> {
        match entry {
            Entry::Structure { id, text } => {
                let structure = parse_structure(text)?;
                let dynamic = match &structure {
                    Structure::Dces(d) => Some(Arc::new(d.clone())),
                    Structure::Ses(s) => Some(Arc::new(embed_ses(s))),
                    Structure::Ges(g) => Some(Arc::new(embed_ges(g))),
                    _ => None,
                };
                let stored = Arc::new(Stored { structure, dynamic });
                self.0.structures.write().expect("lock").insert(id.clone(), stored);
                Ok(None)
            }
            Entry::Session { id, structure_id } => {
                let stored = self.structure(structure_id)?;
                let dces = stored.dynamic.clone().ok_or_else(|| {
                    ApiError::new(
                        StatusCode::BAD_REQUEST,
                        format!("{} structures have no states to step through", stored.structure.kind()),
                    )
                })?;
                let session = Session {
                    structure_id: structure_id.clone(),
                    history: vec![dces.initial_state()],
                    dces,
                    fired: Vec::new(),
                };
                let s = session.summary()?;
                self.0.sessions.write().expect("lock").insert(id.clone(), Arc::new(Mutex::new(session)));
                Ok(Some(s))
            }
            Entry::Step { session, event } => self.session(session)?.lock().expect("session lock").step(event).map(Some),
            Entry::Undo { session } => self.session(session)?.lock().expect("session lock").undo().map(Some),
        }
    }

    fn structure(&self, id: &str) -> ApiResult<Arc<Stored>> {
        self.0.structures.read().expect("lock").get(id).cloned().ok_or_else(|| ApiError::not_found("structure", id))
    }

    fn session(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        self.0.sessions.read().expect("lock").get(id).cloned().ok_or_else(|| ApiError::not_found("session", id))
    }

    /// Steps and undos are journaled while the session is locked so the
    /// journal order matches the history.
    fn mutate_session(&self, id: &str, entry: Entry) -> ApiResult<Summary> {
        let session = self.session(id)?;
        let mut s = session.lock().expect("session lock");
        let out = match &entry {
            Entry::Step { event, .. } => s.step(event)?,
            _ => s.undo()?,
        };
        self.record(&entry)?;
        Ok(out)
    }
}

async fn create_structure(State(st): State<AppState>, body: String) -> ApiResult<impl IntoResponse> {
    let entry = Entry::Structure { id: token(), text: body };
    st.apply(&entry)?;
    st.record(&entry)?;
    let Entry::Structure { id, .. } = entry else { unreachable!() };
    let s = st.structure(&id)?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "kind": s.structure.kind() }))))
}

async fn get_structure(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let s = st.structure(&id)?;
    Ok(Json(json!({
        "id": id,
        "kind": s.structure.kind(),
        "text": render_structure(&s.structure),
        "document": EsDocument::from_structure(&s.structure),
    })))
}

#[derive(Deserialize)]
struct GraphQuery {
    format: Option<String>,
    steps: Option<String>,
}

async fn get_graph(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<GraphQuery>,
) -> ApiResult<Response> {
    let s = st.structure(&id)?;
    let format: GraphFormat = q.format.as_deref().unwrap_or("json").parse()?;
    let mode: StepMode = q.steps.as_deref().unwrap_or("multi").parse()?;
    let text = export_graph(&s.structure.graph(mode)?, format);
    let mime = match format {
        GraphFormat::Json => "application/json",
        GraphFormat::Dot => "text/vnd.graphviz",
    };
    Ok(([(header::CONTENT_TYPE, mime)], text).into_response())
}

#[derive(Deserialize)]
struct NewSession {
    structure_id: String,
}

async fn create_session(State(st): State<AppState>, Json(req): Json<NewSession>) -> ApiResult<impl IntoResponse> {
    let id = token();
    let entry = Entry::Session { id: id.clone(), structure_id: req.structure_id };
    let s = st.apply(&entry)?.expect("sessions start with a summary");
    st.record(&entry)?;
    let mut body = json!(s);
    body["id"] = json!(id);
    Ok((StatusCode::CREATED, Json(body)))
}

async fn get_session(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let session = st.session(&id)?;
    let s = session.lock().expect("session lock");
    let mut body = json!(s.summary()?);
    body["id"] = json!(id);
    body["structure_id"] = json!(s.structure_id);
    body["fired"] = json!(s.fired);
    body["history"] = json!(s.history);
    Ok(Json(body))
}

#[derive(Deserialize)]
struct StepRequest {
    event: String,
}

async fn step(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<StepRequest>,
) -> ApiResult<Json<Summary>> {
    let event = event_id(&req.event)?;
    st.mutate_session(&id, Entry::Step { session: id.clone(), event }).map(Json)
}

async fn undo(State(st): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Summary>> {
    st.mutate_session(&id, Entry::Undo { session: id.clone() }).map(Json)
}

#[derive(Deserialize)]
struct WhatIf {
    event: String,
}

async fn whatif(
    State(st): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<WhatIf>,
) -> ApiResult<Json<Summary>> {
    let session = st.session(&id)?;
    let s = session.lock().expect("session lock");
    let event = event_id(&q.event)?;
    let now = s.current();
    let next = s.dces.fire(now, &event)?;
    summary(&s.dces, Some(now), &next).map(Json)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/structures", post(create_structure))
        .route("/structures/{id}", get(get_structure))
        .route("/structures/{id}/graph", get(get_graph))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/step", post(step))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/whatif", get(whatif))
        .with_state(state)
}

/// Serves the API on `addr` until the process stops.
pub async fn serve(addr: std::net::SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state)).await
}
