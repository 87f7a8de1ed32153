//! Backend for the browser annotation tool.
//!
//! Frames are served straight from the corpus layout and edits are written
//! through to the same `gt/*.xml` files the rest of the toolkit reads. Each
//! frame carries a revision counter; a write must name the revision it was
//! based on and is rejected with a conflict when another write got there first.
//!
//! | Method | Path                  | Result                                   |
//! |--------|-----------------------|------------------------------------------|
//! | GET    | `/frames?channel=&video=&page=&per_page=` | page of frame summaries |
//! | GET    | `/frames/{key}`       | annotation + revision (JSON)             |
//! | GET    | `/frames/{key}/image` | frame image bytes                        |
//! | PUT    | `/frames/{key}`       | new revision; needs `X-Expected-Revision`|
//! | GET    | `/progress`           | annotated/unannotated counts             |
//!
//! Status codes: 200, 400 (bad request), 404 (unknown key), 409 (stale
//! revision), 422 (invalid annotation).

use std::collections::BTreeMap;
use std::io::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{
    load_dataset, validate_dataset, write_frame_annotation, Dataset, DatasetError, FrameAnnotation,
    FrameKey, Script, Severity, TextLine, FRAMES_DIR, GT_DIR, IMAGE_EXTENSIONS,
};
use crate::geometry::Rect;

pub const REVISION_HEADER: &str = "x-expected-revision";
pub const CURRENT_REVISION_HEADER: &str = "x-revision";
pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const DEFAULT_BIND: &str = "127.0.0.1:8750";

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown frame {0}")]
    NotFound(String),
    #[error("stale revision {expected}: frame {key} is at revision {current}")]
    Conflict { key: FrameKey, expected: u64, current: u64 },
    #[error("invalid annotation: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("refusing to bind {0}: pass the external-binding flag to listen beyond loopback")]
    ExternalBind(SocketAddr),
}

#[derive(Debug)]
struct FrameSlot {
    channel: String,
    key: FrameKey,
    image: PathBuf,
    annotation_path: PathBuf,
    width: u32,
    height: u32,
    annotation: Option<FrameAnnotation>,
    revision: u64,
}

impl FrameSlot {
    fn summary(&self) -> FrameSummary {
        FrameSummary {
            key: self.key.to_string(),
            channel: self.channel.clone(),
            video: self.key.video_id.clone(),
            number: self.key.frame_number,
            width: self.width,
            height: self.height,
            line_count: self.annotation.as_ref().map_or(0, |a| a.lines.len()),
            annotated: self.annotation.is_some(),
            revision: self.revision,
        }
    }

    fn current_annotation(&self) -> FrameAnnotation {
        self.annotation.clone().unwrap_or_else(|| FrameAnnotation {
            channel: self.channel.clone(),
            video_id: self.key.video_id.clone(),
            frame_number: self.key.frame_number,
            width: self.width,
            height: self.height,
            lines: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSummary {
    pub key: String,
    pub channel: String,
    pub video: String,
    pub number: u64,
    pub width: u32,
    pub height: u32,
    pub line_count: usize,
    pub annotated: bool,
    pub revision: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct FrameFilter {
    pub channel: Option<String>,
    pub video: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramePage {
    pub total: usize,
    pub page: usize,
    pub per_page: usize,
    pub frames: Vec<FrameSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameView {
    pub summary: FrameSummary,
    pub annotation: FrameAnnotation,
    pub revision: u64,
    pub image: Vec<u8>,
    pub content_type: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelProgress {
    pub channel: String,
    pub annotated: usize,
    pub unannotated: usize,
    pub urdu_lines: usize,
    pub english_lines: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub channels: Vec<ChannelProgress>,
    pub total: ChannelProgress,
}

/// Annotation state for one corpus root.
#[derive(Debug)]
pub struct AnnotationSession {
    root: PathBuf,
    slots: RwLock<BTreeMap<FrameKey, Arc<FrameSlot>>>,
    writers: BTreeMap<FrameKey, Mutex<()>>,
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        _ => "image/jpeg",
    }
}

impl AnnotationSession {
    /// Indexes every frame image under `root`; existing annotations are
    /// loaded strictly and start at revision 0.
    pub fn open(root: &Path) -> Result<Self, ServiceError> {
        let dataset = load_dataset(root)?;
        let mut annotations: BTreeMap<FrameKey, FrameAnnotation> =
            dataset.frames.into_iter().map(|f| (f.key(), f)).collect();
        let mut slots = BTreeMap::new();
        for (channel, video_dir) in video_dirs(root)? {
            let frames_dir = video_dir.join(FRAMES_DIR);
            if !frames_dir.is_dir() {
                continue;
            }
            let mut images: Vec<PathBuf> = read_dir_sorted(&frames_dir)?
                .into_iter()
                .filter(|p| {
                    p.extension()
                        .and_then(|e| e.to_str())
                        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                })
                .collect();
            images.dedup_by(|a, b| a.file_stem() == b.file_stem());
            for image in images {
                let stem = image.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
                let Ok(key) = stem.parse::<FrameKey>() else {
                    log::warn!("skipping {}: name is not <video>_<frame>", image.display());
                    continue;
                };
                let annotation = annotations.remove(&key);
                let (width, height) = match &annotation {
                    Some(a) => (a.width, a.height),
                    None => match image::image_dimensions(&image) {
                        Ok(dims) => dims,
                        Err(e) => {
                            log::warn!("skipping {}: {e}", image.display());
                            continue;
                        }
                    },
                };
                let slot = FrameSlot {
                    channel: channel.clone(),
                    annotation_path: video_dir.join(GT_DIR).join(format!("{key}.xml")),
                    key: key.clone(),
                    image,
                    width,
                    height,
                    annotation,
                    revision: 0,
                };
                slots.insert(key, Arc::new(slot));
            }
        }
        let writers = slots.keys().map(|k| (k.clone(), Mutex::new(()))).collect();
        Ok(AnnotationSession { root: root.to_path_buf(), slots: RwLock::new(slots), writers })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn slot(&self, key: &FrameKey) -> Option<Arc<FrameSlot>> {
        self.slots.read().expect("slot table poisoned").get(key).cloned()
    }

    fn snapshot(&self) -> Vec<Arc<FrameSlot>> {
        self.slots.read().expect("slot table poisoned").values().cloned().collect()
    }

    /// Page numbers start at 0.
    pub fn list_frames(&self, filter: &FrameFilter, page: usize, per_page: usize) -> FramePage {
        let per_page = per_page.max(1);
        let matching: Vec<FrameSummary> = self
            .snapshot()
            .iter()
            .filter(|s| filter.channel.as_ref().is_none_or(|c| *c == s.channel))
            .filter(|s| filter.video.as_ref().is_none_or(|v| *v == s.key.video_id))
            .map(|s| s.summary())
            .collect();
        let total = matching.len();
        let frames = matching.into_iter().skip(page.saturating_mul(per_page)).take(per_page).collect();
        FramePage { total, page, per_page, frames }
    }

    /// Current annotation (empty for unannotated frames) and revision.
    pub fn annotation(&self, key: &FrameKey) -> Result<(FrameAnnotation, u64, bool), ServiceError> {
        let slot = self.slot(key).ok_or_else(|| ServiceError::NotFound(key.to_string()))?;
        Ok((slot.current_annotation(), slot.revision, slot.annotation.is_some()))
    }

    pub fn image(&self, key: &FrameKey) -> Result<(Vec<u8>, &'static str), ServiceError> {
        let slot = self.slot(key).ok_or_else(|| ServiceError::NotFound(key.to_string()))?;
        let bytes = std::fs::read(&slot.image).map_err(|source| ServiceError::Io { path: slot.image.clone(), source })?;
        Ok((bytes, content_type(&slot.image)))
    }

    pub fn get_frame(&self, key: &FrameKey) -> Result<FrameView, ServiceError> {
        let slot = self.slot(key).ok_or_else(|| ServiceError::NotFound(key.to_string()))?;
        let image = std::fs::read(&slot.image).map_err(|source| ServiceError::Io { path: slot.image.clone(), source })?;
        Ok(FrameView {
            summary: slot.summary(),
            annotation: slot.current_annotation(),
            revision: slot.revision,
            image,
            content_type: content_type(&slot.image),
        })
    }

    fn validate(slot: &FrameSlot, fa: &FrameAnnotation) -> Result<(), ServiceError> {
        let mut problems = Vec::new();
        if fa.key() != slot.key {
            problems.push(format!("annotation describes frame {} but was sent to {}", fa.key(), slot.key));
        }
        if fa.channel != slot.channel {
            problems.push(format!("channel `{}` does not match `{}`", fa.channel, slot.channel));
        }
        if (fa.width, fa.height) != (slot.width, slot.height) {
            problems.push(format!(
                "frame size {}x{} does not match the image size {}x{}",
                fa.width, fa.height, slot.width, slot.height
            ));
        }
        problems.extend(
            validate_dataset(&Dataset::new(vec![fa.clone()]))
                .into_iter()
                .filter(|i| i.severity == Severity::Error)
                .map(|i| i.to_string()),
        );
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ServiceError::Validation(problems))
        }
    }

    /// Validates, writes the canonical XML atomically and bumps the revision.
    pub fn put_annotation(&self, key: &FrameKey, fa: FrameAnnotation, expected_revision: u64) -> Result<u64, ServiceError> {
        let lock = self.writers.get(key).ok_or_else(|| ServiceError::NotFound(key.to_string()))?;
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        let slot = self.slot(key).ok_or_else(|| ServiceError::NotFound(key.to_string()))?;
        if slot.revision != expected_revision {
            return Err(ServiceError::Conflict { key: key.clone(), expected: expected_revision, current: slot.revision });
        }
        Self::validate(&slot, &fa)?;
        atomic_write(&slot.annotation_path, write_frame_annotation(&fa).as_bytes())?;
        let revision = slot.revision + 1;
        let updated = FrameSlot {
            channel: slot.channel.clone(),
            key: slot.key.clone(),
            image: slot.image.clone(),
            annotation_path: slot.annotation_path.clone(),
            width: slot.width,
            height: slot.height,
            annotation: Some(fa),
            revision,
        };
        self.slots.write().expect("slot table poisoned").insert(key.clone(), Arc::new(updated));
        Ok(revision)
    }

    pub fn progress(&self) -> Progress {
        let mut per_channel: BTreeMap<String, ChannelProgress> = BTreeMap::new();
        for slot in self.snapshot() {
            let entry = per_channel
                .entry(slot.channel.clone())
                .or_insert_with(|| ChannelProgress { channel: slot.channel.clone(), ..Default::default() });
            match &slot.annotation {
                Some(a) => {
                    entry.annotated += 1;
                    entry.urdu_lines += a.line_count(Script::Urdu);
                    entry.english_lines += a.line_count(Script::English);
                }
                None => entry.unannotated += 1,
            }
        }
        let channels: Vec<ChannelProgress> = per_channel.into_values().collect();
        let mut total = ChannelProgress { channel: "Total".into(), ..Default::default() };
        for c in &channels {
            total.annotated += c.annotated;
            total.unannotated += c.unannotated;
            total.urdu_lines += c.urdu_lines;
            total.english_lines += c.english_lines;
        }
        Progress { channels, total }
    }
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>, ServiceError> {
    let io = |source| ServiceError::Io { path: dir.to_path_buf(), source };
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        out.push(entry.map_err(io)?.path());
    }
    out.sort();
    Ok(out)
}

fn video_dirs(root: &Path) -> Result<Vec<(String, PathBuf)>, ServiceError> {
    let mut out = Vec::new();
    for channel_dir in read_dir_sorted(root)?.into_iter().filter(|p| p.is_dir()) {
        let channel = channel_dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        for video_dir in read_dir_sorted(&channel_dir)?.into_iter().filter(|p| p.is_dir()) {
            out.push((channel.clone(), video_dir));
        }
    }
    Ok(out)
}

/// Writes to a temporary file beside `path`, then renames it into place.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), ServiceError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let io = |source| ServiceError::Io { path: path.to_path_buf(), source };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// JSON body mirroring the annotation XML.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireAnnotation {
    pub channel: String,
    pub video: String,
    pub number: u64,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub lines: Vec<WireLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireLine {
    pub x: i64,
    pub y: i64,
    pub width: i64,
    pub height: i64,
    pub script: Script,
    #[serde(default)]
    pub transcription: String,
}

impl From<&FrameAnnotation> for WireAnnotation {
    fn from(fa: &FrameAnnotation) -> Self {
        WireAnnotation {
            channel: fa.channel.clone(),
            video: fa.video_id.clone(),
            number: fa.frame_number,
            width: fa.width,
            height: fa.height,
            lines: fa
                .lines
                .iter()
                .map(|l| WireLine {
                    x: l.bbox.x,
                    y: l.bbox.y,
                    width: l.bbox.width,
                    height: l.bbox.height,
                    script: l.script,
                    transcription: l.transcription.clone(),
                })
                .collect(),
        }
    }
}

impl From<WireAnnotation> for FrameAnnotation {
    fn from(w: WireAnnotation) -> Self {
        FrameAnnotation {
            channel: w.channel,
            video_id: w.video,
            frame_number: w.number,
            width: w.width,
            height: w.height,
            lines: w
                .lines
                .into_iter()
                .map(|l| TextLine::new(Rect::new(l.x, l.y, l.width, l.height), l.script, l.transcription))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameResponse {
    pub key: String,
    pub revision: u64,
    pub annotated: bool,
    pub annotation: WireAnnotation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PutResponse {
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_revision: Option<u64>,
}

fn error_response(status: StatusCode, error: &str, details: Vec<String>, current_revision: Option<u64>) -> Response {
    (status, Json(ErrorResponse { error: error.into(), details, current_revision })).into_response()
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        match self {
            ServiceError::NotFound(key) => error_response(StatusCode::NOT_FOUND, "not-found", vec![key], None),
            ServiceError::Conflict { current, .. } => {
                let msg = self.to_string();
                error_response(StatusCode::CONFLICT, "conflict", vec![msg], Some(current))
            }
            ServiceError::Validation(problems) => {
                error_response(StatusCode::UNPROCESSABLE_ENTITY, "validation", problems, None)
            }
            other => {
                log::error!("{other}");
                error_response(StatusCode::INTERNAL_SERVER_ERROR, "internal", vec![other.to_string()], None)
            }
        }
    }
}

type Shared = Arc<AnnotationSession>;

#[derive(Debug, Deserialize)]
struct ListQuery {
    channel: Option<String>,
    video: Option<String>,
    page: Option<usize>,
    per_page: Option<usize>,
}

async fn list_handler(State(session): State<Shared>, Query(q): Query<ListQuery>) -> Json<FramePage> {
    let filter = FrameFilter {
        channel: q.channel.filter(|c| !c.is_empty()),
        video: q.video.filter(|v| !v.is_empty()),
    };
    Json(session.list_frames(&filter, q.page.unwrap_or(0), q.per_page.unwrap_or(DEFAULT_PAGE_SIZE)))
}

fn parse_key(raw: &str) -> Result<FrameKey, ServiceError> {
    raw.parse().map_err(|_| ServiceError::NotFound(raw.to_string()))
}

fn with_revision(mut response: Response, revision: u64) -> Response {
    response
        .headers_mut()
        .insert(CURRENT_REVISION_HEADER, HeaderValue::from_str(&revision.to_string()).expect("digits are a valid header"));
    response
}

async fn get_handler(State(session): State<Shared>, UrlPath(raw): UrlPath<String>) -> Result<Response, ServiceError> {
    let key = parse_key(&raw)?;
    let (annotation, revision, annotated) = session.annotation(&key)?;
    let body = FrameResponse { key: key.to_string(), revision, annotated, annotation: (&annotation).into() };
    Ok(with_revision(Json(body).into_response(), revision))
}

async fn image_handler(State(session): State<Shared>, UrlPath(raw): UrlPath<String>) -> Result<Response, ServiceError> {
    let key = parse_key(&raw)?;
    let (bytes, content_type) = session.image(&key)?;
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}

async fn put_handler(
    State(session): State<Shared>,
    UrlPath(raw): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let key = parse_key(&raw)?;
    let expected = match headers.get(REVISION_HEADER).map(|v| v.to_str().map(|s| s.trim().parse::<u64>())) {
        Some(Ok(Ok(rev))) => rev,
        _ => {
            return Ok(error_response(
                StatusCode::BAD_REQUEST,
                "bad-request",
                vec![format!("header `{REVISION_HEADER}` with the base revision is required")],
                None,
            ))
        }
    };
    let wire: WireAnnotation =
        serde_json::from_slice(&body).map_err(|e| ServiceError::Validation(vec![format!("malformed annotation: {e}")]))?;
    let revision = tokio::task::spawn_blocking(move || session.put_annotation(&key, wire.into(), expected))
        .await
        .expect("annotation writer panicked")?;
    Ok(with_revision(Json(PutResponse { revision }).into_response(), revision))
}

async fn progress_handler(State(session): State<Shared>) -> Json<Progress> {
    Json(session.progress())
}

pub fn router(session: Arc<AnnotationSession>) -> Router {
    Router::new()
        .route("/frames", get(list_handler))
        .route("/frames/{key}", get(get_handler).put(put_handler))
        .route("/frames/{key}/image", get(image_handler))
        .route("/progress", get(progress_handler))
        .with_state(session)
}

pub fn check_bind(addr: SocketAddr, allow_external: bool) -> Result<(), ServiceError> {
    if addr.ip().is_loopback() || allow_external {
        Ok(())
    } else {
        Err(ServiceError::ExternalBind(addr))
    }
}

/// Serves `session` on an already bound listener until the task is dropped.
pub async fn serve_on(listener: tokio::net::TcpListener, session: Arc<AnnotationSession>) -> std::io::Result<()> {
    axum::serve(listener, router(session)).await
}

/// Opens `root` and serves it on `addr` until Ctrl-C.
pub fn serve(root: &Path, addr: SocketAddr, allow_external: bool) -> Result<(), ServiceError> {
    check_bind(addr, allow_external)?;
    let session = Arc::new(AnnotationSession::open(root)?);
    let runtime = tokio::runtime::Runtime::new().map_err(|source| ServiceError::Io { path: root.to_path_buf(), source })?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|source| ServiceError::Io { path: root.to_path_buf(), source })?;
        log::info!("annotation service for {} on http://{}", root.display(), listener.local_addr().unwrap_or(addr));
        axum::serve(listener, router(session))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|source| ServiceError::Io { path: root.to_path_buf(), source })
    })
}
