//! HTTP interface over review sessions for the browser UI.
//!
//! | method | path                                 | body / response                |
//! |--------|--------------------------------------|--------------------------------|
//! | GET    | `/api/sessions`                      | `[{session_id, image_id}]`     |
//! | GET    | `/api/sessions/{id}`                 | [`ApiSessionState`]            |
//! | POST   | `/api/sessions/{id}/toggle`          | `{x, y}` -> [`EditOutcome`]    |
//! | POST   | `/api/sessions/{id}/label`           | `{superpixel, label}` -> same  |
//! | POST   | `/api/sessions/{id}/undo`            | -> same, reversing the edit    |
//! | GET    | `/api/sessions/{id}/image.png`       | source image                   |
//! | GET    | `/api/sessions/{id}/overlay.png`     | 50% palette overlay            |
//! | GET    | `/api/sessions/{id}/labelmap.png`    | id-encoded superpixels         |
//! | POST   | `/api/sessions/{id}/export`          | [`OutputPaths`]                |
//!
//! Failed edits answer 422 and unknown sessions 404, both with a body of
//! the form `{"error": code, "message": text}`.

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use crate::color::RgbImage;
use crate::divergence::ClassLabel;
use crate::error::{Error, Result};
use crate::output::{write_result, OutputPaths};
use crate::render::{render_label_map, render_overlay};
use crate::session::{EditOutcome, Session};

/// A session together with the image it was segmented from.
#[derive(Debug)]
pub struct SessionSlot {
    source: RgbImage,
    session: RwLock<Session>,
}

impl SessionSlot {
    pub fn source(&self) -> &RgbImage {
        &self.source
    }

    /// Runs `f` on a consistent snapshot of the session.
    pub fn read<T>(&self, f: impl FnOnce(&Session) -> T) -> T {
        f(&self.session.read().unwrap_or_else(|e| e.into_inner()))
    }

    /// Runs `f` with exclusive access; edits on one session are serialized.
    pub fn write<T>(&self, f: impl FnOnce(&mut Session) -> T) -> T {
        f(&mut self.session.write().unwrap_or_else(|e| e.into_inner()))
    }
}

/// In-memory sessions, listed in insertion order.
#[derive(Debug)]
pub struct SessionStore {
    slots: RwLock<Vec<(String, Arc<SessionSlot>)>>,
    out_dir: PathBuf,
    export_on_edit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub image_id: String,
}

impl SessionStore {
    /// `out_dir` receives exported label images and reports.
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            slots: RwLock::new(Vec::new()),
            out_dir: out_dir.into(),
            export_on_edit: false,
        }
    }

    /// Rewrites the exported files after every successful edit.
    pub fn export_on_edit(mut self, enabled: bool) -> Self {
        self.export_on_edit = enabled;
        self
    }

    pub fn insert(&self, session: Session, source: RgbImage) -> Result<String> {
        let map = &session.result().map;
        if (map.width(), map.height()) != (source.width(), source.height()) {
            return Err(Error::Parameter(format!(
                "source image is {}x{} but the session covers {}x{}",
                source.width(),
                source.height(),
                map.width(),
                map.height()
            )));
        }
        let id = session.id().to_string();
        let slot = Arc::new(SessionSlot {
            source,
            session: RwLock::new(session),
        });
        self.slots
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .push((id.clone(), slot));
        Ok(id)
    }

    pub fn get(&self, id: &str) -> Option<Arc<SessionSlot>> {
        self.slots
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .find(|(sid, _)| sid == id)
            .map(|(_, slot)| Arc::clone(slot))
    }

    pub fn list(&self) -> Vec<SessionSummary> {
        self.slots
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .map(|(id, slot)| SessionSummary {
                session_id: id.clone(),
                image_id: slot.read(|s| s.result().source_image_id.clone()),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.slots.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn out_dir(&self) -> &std::path::Path {
        &self.out_dir
    }

    /// Writes the current label image and report of a session.
    pub fn export(&self, id: &str) -> Result<OutputPaths> {
        let slot = self
            .get(id)
            .ok_or_else(|| Error::Parameter(format!("unknown session {id}")))?;
        let (labels, report) = slot.read(|s| s.export_result());
        write_result(&self.out_dir, &labels, &report)
    }
}

/// Session state as served to the UI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiSessionState {
    pub session_id: String,
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub superpixel_count: usize,
    pub labels: Vec<ClassLabel>,
    pub bqi: f64,
    pub revision: u64,
    pub image_url: String,
    pub overlay_url: String,
    pub label_map_url: String,
}

impl ApiSessionState {
    pub fn of(session: &Session) -> Self {
        let id = session.id();
        let map = &session.result().map;
        Self {
            session_id: id.to_string(),
            image_id: session.result().source_image_id.clone(),
            width: map.width(),
            height: map.height(),
            superpixel_count: map.len(),
            labels: session.labels().to_vec(),
            bqi: session.bqi(),
            revision: session.revision(),
            image_url: format!("/api/sessions/{id}/image.png"),
            overlay_url: format!("/api/sessions/{id}/overlay.png"),
            label_map_url: format!("/api/sessions/{id}/labelmap.png"),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct ToggleRequest {
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LabelRequest {
    pub superpixel: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    pub message: String,
}

struct Failure(StatusCode, ApiError);

impl Failure {
    fn new(status: StatusCode, code: &str, message: impl ToString) -> Self {
        Failure(
            status,
            ApiError {
                error: code.to_string(),
                message: message.to_string(),
            },
        )
    }

    fn unknown_session(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown_session",
            format!("no session {id}"),
        )
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let unprocessable = StatusCode::UNPROCESSABLE_ENTITY;
        match e {
            Error::OutOfBounds { .. } => Self::new(unprocessable, "out_of_bounds", e),
            Error::UnknownSuperpixel(_) => Self::new(unprocessable, "unknown_superpixel", e),
            Error::NothingToUndo => Self::new(unprocessable, "nothing_to_undo", e),
            Error::Parameter(_) => Self::new(unprocessable, "invalid_request", e),
            _ => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e),
        }
    }
}

impl From<JsonRejection> for Failure {
    fn from(e: JsonRejection) -> Self {
        Self::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_request",
            e.body_text(),
        )
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type Shared = Arc<SessionStore>;

fn slot(store: &SessionStore, id: &str) -> std::result::Result<Arc<SessionSlot>, Failure> {
    store.get(id).ok_or_else(|| Failure::unknown_session(id))
}

fn png(img: Result<RgbImage>) -> std::result::Result<Response, Failure> {
    let bytes = img.and_then(|i| i.to_png())?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

async fn list_sessions(State(store): State<Shared>) -> Json<Vec<SessionSummary>> {
    Json(store.list())
}

async fn session_state(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> std::result::Result<Json<ApiSessionState>, Failure> {
    Ok(Json(slot(&store, &id)?.read(ApiSessionState::of)))
}

fn edit(
    store: &SessionStore,
    id: &str,
    f: impl FnOnce(&mut Session) -> Result<EditOutcome>,
) -> std::result::Result<Json<EditOutcome>, Failure> {
    let outcome = slot(store, id)?.write(f)?;
    if store.export_on_edit {
        store.export(id)?;
    }
    Ok(Json(outcome))
}

async fn toggle(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: std::result::Result<Json<ToggleRequest>, JsonRejection>,
) -> std::result::Result<Json<EditOutcome>, Failure> {
    let Json(req) = body?;
    edit(&store, &id, |s| s.toggle_label(req.x, req.y))
}

async fn set_label(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: std::result::Result<Json<LabelRequest>, JsonRejection>,
) -> std::result::Result<Json<EditOutcome>, Failure> {
    let Json(req) = body?;
    let label: ClassLabel = req.label.parse()?;
    edit(&store, &id, |s| s.set_label(req.superpixel, label))
}

/// The reply describes the reverting transition: `old_label` is the label
/// being discarded and `new_label` the restored one.
async fn undo(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> std::result::Result<Json<EditOutcome>, Failure> {
    edit(&store, &id, |s| {
        let e = s.undo()?;
        Ok(EditOutcome {
            superpixel: e.superpixel,
            old_label: e.new_label,
            new_label: e.old_label,
            bqi: s.bqi(),
            revision: s.revision(),
        })
    })
}

async fn source_png(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> std::result::Result<Response, Failure> {
    png(Ok(slot(&store, &id)?.source().clone()))
}

async fn overlay_png(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> std::result::Result<Response, Failure> {
    let slot = slot(&store, &id)?;
    png(Ok(slot.read(|s| {
        render_overlay(slot.source(), &s.result().map, s.labels())
    })))
}

async fn labelmap_png(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> std::result::Result<Response, Failure> {
    png(slot(&store, &id)?.read(|s| render_label_map(&s.result().map)))
}

async fn export(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> std::result::Result<Json<OutputPaths>, Failure> {
    slot(&store, &id)?;
    Ok(Json(store.export(&id)?))
}

pub fn router(store: Shared) -> Router {
    Router::new()
        .route("/api/sessions", get(list_sessions))
        .route("/api/sessions/{id}", get(session_state))
        .route("/api/sessions/{id}/toggle", post(toggle))
        .route("/api/sessions/{id}/label", post(set_label))
        .route("/api/sessions/{id}/undo", post(undo))
        .route("/api/sessions/{id}/image.png", get(source_png))
        .route("/api/sessions/{id}/overlay.png", get(overlay_png))
        .route("/api/sessions/{id}/labelmap.png", get(labelmap_png))
        .route("/api/sessions/{id}/export", post(export))
        .with_state(store)
}

/// A bound but not yet running review service.
pub struct ReviewServer {
    listener: TcpListener,
    store: Shared,
}

impl ReviewServer {
    /// Binds `host:port`; port 0 picks a free port.
    pub async fn bind(store: Shared, host: &str, port: u16) -> Result<Self> {
        let addr = format!("{host}:{port}");
        let listener = TcpListener::bind(&addr)
            .await
            .map_err(|source| Error::Bind { addr, source })?;
        Ok(Self { listener, store })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Serves until `shutdown` resolves, then drains open connections.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<()> {
        axum::serve(self.listener, router(self.store))
            .with_graceful_shutdown(shutdown)
            .await?;
        Ok(())
    }
}

/// A service running on its own thread, for tests and embedding in
/// synchronous code.
pub struct BackgroundServer {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<Result<()>>>,
}

impl BackgroundServer {
    pub fn start(store: Shared, host: &str, port: u16) -> Result<Self> {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let server = rt.block_on(ReviewServer::bind(store, host, port))?;
        let addr = server.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            rt.block_on(server.run(async {
                let _ = stopped.await;
            }))
        });
        Ok(Self {
            addr,
            stop: Some(stop),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(mut self) -> Result<()> {
        self.stop_and_join()
    }

    fn stop_and_join(&mut self) -> Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        match self.thread.take() {
            Some(t) => t
                .join()
                .map_err(|_| Error::Internal("review service thread panicked".into()))?,
            None => Ok(()),
        }
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        let _ = self.stop_and_join();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::tests::quadrant_result;
    use ClassLabel::*;

    fn store_with_one() -> (SessionStore, String) {
        let store = SessionStore::new(std::env::temp_dir());
        let session =
            Session::new(quadrant_result(vec![Tooth, Biofilm, Tooth, Background])).unwrap();
        let src = RgbImage::filled(4, 4, [10, 200, 10]).unwrap();
        let id = store.insert(session, src).unwrap();
        (store, id)
    }

    #[test]
    fn store_lists_in_insertion_order() {
        let (store, id) = store_with_one();
        assert_eq!(store.len(), 1);
        assert_eq!(store.list()[0].session_id, id);
        assert!(store.get("nope").is_none());
    }

    #[test]
    fn store_rejects_mismatched_source() {
        let store = SessionStore::new(std::env::temp_dir());
        let session = Session::new(quadrant_result(vec![Tooth; 4])).unwrap();
        let src = RgbImage::filled(5, 4, [0, 0, 0]).unwrap();
        assert!(store.insert(session, src).is_err());
    }

    #[test]
    fn state_projection() {
        let (store, id) = store_with_one();
        let st = store.get(&id).unwrap().read(ApiSessionState::of);
        assert_eq!(st.superpixel_count, 4);
        assert_eq!(st.labels.len(), 4);
        assert_eq!(st.revision, 0);
        assert_eq!(st.label_map_url, format!("/api/sessions/{id}/labelmap.png"));
    }

    #[test]
    fn error_status_codes() {
        let f = Failure::from(Error::NothingToUndo);
        assert_eq!(f.0, StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(f.1.error, "nothing_to_undo");
        let f = Failure::from(Error::Internal("x".into()));
        assert_eq!(f.0, StatusCode::INTERNAL_SERVER_ERROR);
        assert_eq!(Failure::unknown_session("s9").0, StatusCode::NOT_FOUND);
    }
}
