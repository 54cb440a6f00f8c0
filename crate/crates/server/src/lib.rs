//! HTTP backend for the frame annotation UI.
//!
//! Serves the video list and frame images of a loaded dataset and persists
//! start/end annotations into `annotations/<annotator>.csv`, the same file the
//! dataset loader reads.

mod error;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use cbass_core::formats::{read_annotations, render_intervals, write_atomic};
use cbass_core::{AnnotatorId, Dataset, EventInterval, Scene, VideoId};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::{Mutex as AsyncMutex, OwnedMutexGuard};
use tower_http::services::ServeDir;

pub use error::ApiError;

const FRAME_CACHE_CONTROL: &str = "public, max-age=86400, immutable";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoEntry {
    pub video_id: VideoId,
    pub scene: Scene,
    pub frame_count: usize,
    pub annotated_by_me: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalBody {
    pub start: i64,
    pub end: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationBody {
    pub video_id: VideoId,
    pub annotator_id: AnnotatorId,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Deserialize)]
struct ListQuery {
    annotator: Option<String>,
}

/// Shared, cheaply clonable server state. The dataset is loaded once and never
/// mutated; annotation files are re-read on every request.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
    write_attempts: u32,
    retry_delay: Duration,
}

struct Inner {
    root: PathBuf,
    dataset: Result<Dataset, LoadFailure>,
    ui_dir: Option<PathBuf>,
    locks: Mutex<HashMap<AnnotatorId, Arc<AsyncMutex<()>>>>,
}

#[derive(Debug, Clone)]
struct LoadFailure {
    kind: &'static str,
    message: String,
}

impl AppState {
    /// Loads the dataset at `root`. A load failure is kept and reported as
    /// 500 by the API instead of failing here.
    pub fn open(root: impl Into<PathBuf>, ui_dir: Option<PathBuf>) -> Self {
        let root = root.into();
        let dataset = Dataset::load(&root).map_err(|e| LoadFailure {
            kind: e.kind(),
            message: e.to_string(),
        });
        AppState {
            inner: Arc::new(Inner {
                root,
                dataset,
                ui_dir,
                locks: Mutex::new(HashMap::new()),
            }),
            write_attempts: 20,
            retry_delay: Duration::from_millis(25),
        }
    }

    /// Overrides how often a write retries a busy annotator lock before 409.
    pub fn with_write_retries(mut self, attempts: u32, delay: Duration) -> Self {
        self.write_attempts = attempts.max(1);
        self.retry_delay = delay;
        self
    }

    /// The load error, if the dataset failed to load, as `(kind, message)`.
    pub fn load_error(&self) -> Option<(&'static str, &str)> {
        self.inner.dataset.as_ref().err().map(|e| (e.kind, e.message.as_str()))
    }

    pub fn root(&self) -> &Path {
        &self.inner.root
    }

    /// Write lock for one annotator's file.
    pub fn annotator_lock(&self, annotator: &AnnotatorId) -> Arc<AsyncMutex<()>> {
        let mut locks = self.inner.locks.lock().unwrap_or_else(|p| p.into_inner());
        locks.entry(annotator.clone()).or_default().clone()
    }

    fn dataset(&self) -> Result<&Dataset, ApiError> {
        self.inner.dataset.as_ref().map_err(|e| {
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.kind, e.message.clone())
        })
    }

    fn annotation_file(&self, annotator: &AnnotatorId) -> PathBuf {
        self.inner.root.join("annotations").join(format!("{annotator}.csv"))
    }

    async fn acquire(&self, annotator: &AnnotatorId) -> Result<OwnedMutexGuard<()>, ApiError> {
        let lock = self.annotator_lock(annotator);
        for attempt in 0..self.write_attempts {
            if let Ok(guard) = lock.clone().try_lock_owned() {
                return Ok(guard);
            }
            if attempt + 1 < self.write_attempts {
                tokio::time::sleep(self.retry_delay).await;
            }
        }
        Err(ApiError::new(
            StatusCode::CONFLICT,
            "Conflict",
            format!("annotations of {annotator} are being written"),
        ))
    }
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/api/videos", get(list_videos))
        .route("/api/videos/{id}/frames/{n}", get(get_frame))
        .route(
            "/api/videos/{id}/annotations/{annotator}",
            get(get_annotation).put(put_annotation),
        );
    let api = match &state.inner.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    api.with_state(state)
}

/// Serves on an already bound listener until the process is stopped.
pub async fn serve(state: AppState, listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

fn parse_annotator(raw: &str) -> Result<AnnotatorId, ApiError> {
    AnnotatorId::new(raw).map_err(|e| ApiError::bad_request("BadToken", e.to_string()))
}

fn known_video<'d>(dataset: &'d Dataset, raw: &str) -> Result<&'d cbass_core::VideoMeta, ApiError> {
    VideoId::new(raw)
        .ok()
        .and_then(|id| dataset.video(&id))
        .ok_or_else(|| ApiError::not_found(format!("unknown video {raw}")))
}

/// Reads an annotator's file; a missing file means no annotations yet.
fn read_annotator_file(path: &Path) -> Result<BTreeMap<VideoId, EventInterval>, cbass_core::Error> {
    if !path.is_file() {
        return Ok(BTreeMap::new());
    }
    Ok(read_annotations(path)?
        .into_iter()
        .map(|(_, video, iv)| (video, iv))
        .collect())
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, cbass_core::Error> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Join", e.to_string()))?
        .map_err(|e| ApiError::internal(&e))
}

async fn list_videos(
    State(state): State<AppState>,
    Query(query): Query<ListQuery>,
) -> Result<Json<Vec<VideoEntry>>, ApiError> {
    let dataset = state.dataset()?;
    let mine = match query.annotator.as_deref() {
        Some(raw) => {
            let path = state.annotation_file(&parse_annotator(raw)?);
            blocking(move || read_annotator_file(&path)).await?
        }
        None => BTreeMap::new(),
    };
    let entries = dataset
        .videos()
        .map(|meta| VideoEntry {
            video_id: meta.video_id.clone(),
            scene: meta.scene,
            frame_count: meta.frame_count(),
            annotated_by_me: mine.contains_key(&meta.video_id),
        })
        .collect();
    Ok(Json(entries))
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        _ => "application/octet-stream",
    }
}

async fn get_frame(
    State(state): State<AppState>,
    UrlPath((id, n)): UrlPath<(String, usize)>,
) -> Result<Response, ApiError> {
    let dataset = state.dataset()?;
    let meta = known_video(dataset, &id)?;
    let path = dataset
        .frame_path(&meta.video_id, n)
        .ok_or_else(|| ApiError::not_found(format!("{id} has no frame {n}")))?;
    let bytes = match tokio::fs::read(&path).await {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(ApiError::not_found(format!("{} is gone", path.display())))
        }
        Err(e) => return Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Io", e.to_string())),
    };
    Ok((
        [
            (header::CONTENT_TYPE, content_type(&path)),
            (header::CACHE_CONTROL, FRAME_CACHE_CONTROL),
        ],
        bytes,
    )
        .into_response())
}

async fn get_annotation(
    State(state): State<AppState>,
    UrlPath((id, annotator)): UrlPath<(String, String)>,
) -> Result<Json<AnnotationBody>, ApiError> {
    let dataset = state.dataset()?;
    let video = known_video(dataset, &id)?.video_id.clone();
    let annotator = parse_annotator(&annotator)?;
    let path = state.annotation_file(&annotator);
    let saved = blocking(move || read_annotator_file(&path)).await?;
    let iv = saved
        .get(&video)
        .ok_or_else(|| ApiError::not_found(format!("{annotator} has not annotated {video}")))?;
    Ok(Json(AnnotationBody {
        start: iv.start(),
        end: iv.end(),
        video_id: video,
        annotator_id: annotator,
    }))
}

async fn put_annotation(
    State(state): State<AppState>,
    UrlPath((id, annotator)): UrlPath<(String, String)>,
    body: Result<Json<IntervalBody>, JsonRejection>,
) -> Result<Json<AnnotationBody>, ApiError> {
    let dataset = state.dataset()?;
    let meta = known_video(dataset, &id)?;
    let annotator = parse_annotator(&annotator)?;
    let Json(body) = body.map_err(|e| ApiError::bad_request("BadBody", e.body_text()))?;
    let (start, end) = match (usize::try_from(body.start), usize::try_from(body.end)) {
        (Ok(s), Ok(e)) => (s, e),
        _ => return Err(ApiError::bad_request("InvalidInterval", "start and end must be non-negative")),
    };
    let iv = EventInterval::within(start, end, meta.frame_count())
        .map_err(|e| ApiError::bad_request(e.kind(), e.to_string()))?;

    let video = meta.video_id.clone();
    let path = state.annotation_file(&annotator);
    let guard = state.acquire(&annotator).await?;
    let row = video.clone();
    blocking(move || {
        let _guard = guard;
        let mut saved = read_annotator_file(&path)?;
        saved.insert(row, iv);
        let text = render_intervals(saved.iter().map(|(v, iv)| (v, Some(*iv))));
        write_atomic(&path, text.as_bytes())
    })
    .await?;
    Ok(Json(AnnotationBody {
        video_id: video,
        annotator_id: annotator,
        start: iv.start(),
        end: iv.end(),
    }))
}
