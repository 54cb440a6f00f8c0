use std::fs;
use std::path::Path;
use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use cbass_core::{AnnotatorId, Dataset, VideoId};
use cbass_server::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

/// Frame files only need valid names: the server never decodes them.
fn write_video(root: &Path, id: &str, frames: usize) {
    let dir = root.join("videos").join(id).join("frames");
    fs::create_dir_all(&dir).unwrap();
    for i in 0..frames {
        fs::write(dir.join(format!("{i:06}.png")), format!("{id}-frame-{i}")).unwrap();
    }
}

fn layout(root: &Path) {
    for d in ["videos", "scores", "annotations", "splits"] {
        fs::create_dir_all(root.join(d)).unwrap();
    }
}

/// `v01` has 600 frames, `v02` has 12; `U01` already annotated `v02`.
fn toy(root: &Path) {
    layout(root);
    write_video(root, "v01", 600);
    write_video(root, "v02", 12);
    fs::write(root.join("scenes.cfg"), "scene_a = v01\nscene_b = v02\n").unwrap();
    fs::write(root.join("annotations/U01.csv"), "video,start,end\nv02,3,7\n").unwrap();
}

fn app(root: &Path) -> Router {
    router(AppState::open(root, None))
}

async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
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
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn json_of(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = send(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::test]
async fn lists_videos_in_order() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let app = app(dir.path());
    let (status, body) = json_of(&app, Method::GET, "/api/videos", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        body,
        json!([
            {"video_id": "v01", "scene": "A", "frame_count": 600, "annotated_by_me": false},
            {"video_id": "v02", "scene": "B", "frame_count": 12, "annotated_by_me": false},
        ])
    );
    let (_, body) = json_of(&app, Method::GET, "/api/videos?annotator=U01", None).await;
    assert_eq!(body[0]["annotated_by_me"], false);
    assert_eq!(body[1]["annotated_by_me"], true);

    let (status, _) = json_of(&app, Method::GET, "/api/videos?annotator=no%20way", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn empty_dataset_lists_nothing() {
    let dir = tempfile::tempdir().unwrap();
    layout(dir.path());
    let (status, body) = json_of(&app(dir.path()), Method::GET, "/api/videos", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!([]));
}

#[tokio::test]
async fn broken_dataset_is_server_error() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::open(dir.path(), None);
    assert_eq!(state.load_error().unwrap().0, "MissingFile");
    let (status, body) = json_of(&router(state), Method::GET, "/api/videos", None).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    assert_eq!(body["error"], "MissingFile");
}

#[tokio::test]
async fn serves_frames() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let app = app(dir.path());
    let req = Request::get("/api/videos/v01/frames/0").body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()[header::CONTENT_TYPE], "image/png");
    assert!(resp.headers().contains_key(header::CACHE_CONTROL));
    let first = resp.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&first[..], b"v01-frame-0");

    let (status, again) = send(&app, Method::GET, "/api/videos/v01/frames/0", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(again, first.to_vec());

    let (status, last) = send(&app, Method::GET, "/api/videos/v01/frames/599", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(last, b"v01-frame-599");

    for uri in ["/api/videos/v01/frames/600", "/api/videos/vXX/frames/0", "/api/videos/bad%20id/frames/0"] {
        assert_eq!(send(&app, Method::GET, uri, None).await.0, StatusCode::NOT_FOUND, "{uri}");
    }
}

#[tokio::test]
async fn put_persists_in_loader_format() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let app = app(dir.path());
    let uri = "/api/videos/v01/annotations/U02";
    let (status, body) = json_of(&app, Method::PUT, uri, Some(json!({"start": 230, "end": 510}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"video_id": "v01", "annotator_id": "U02", "start": 230, "end": 510}));
    assert_eq!(
        fs::read_to_string(dir.path().join("annotations/U02.csv")).unwrap(),
        "video,start,end\nv01,230,510\n"
    );

    let ds = Dataset::load(dir.path()).unwrap();
    let iv = ds
        .annotation(&AnnotatorId::new("U02").unwrap(), &VideoId::new("v01").unwrap())
        .unwrap();
    assert_eq!((iv.start(), iv.end()), (230, 510));

    let (status, body) = json_of(&app, Method::GET, uri, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["start"], 230);
}

#[tokio::test]
async fn put_upserts_and_keeps_rows_sorted() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let app = app(dir.path());
    let put = |video: &str, s: i64, e: i64| {
        let app = app.clone();
        let uri = format!("/api/videos/{video}/annotations/U01");
        async move { json_of(&app, Method::PUT, &uri, Some(json!({"start": s, "end": e}))).await }
    };
    assert_eq!(put("v01", 10, 20).await.0, StatusCode::OK);
    assert_eq!(put("v01", 11, 25).await.0, StatusCode::OK);
    assert_eq!(put("v02", 0, 11).await.0, StatusCode::OK);
    assert_eq!(
        fs::read_to_string(dir.path().join("annotations/U01.csv")).unwrap(),
        "video,start,end\nv01,11,25\nv02,0,11\n"
    );
    let (_, body) = json_of(&app, Method::GET, "/api/videos/v01/annotations/U01", None).await;
    assert_eq!((body["start"].clone(), body["end"].clone()), (json!(11), json!(25)));
    Dataset::load(dir.path()).unwrap();
}

#[tokio::test]
async fn put_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let app = app(dir.path());
    let uri = "/api/videos/v02/annotations/U03";
    for body in [
        json!({"start": 7, "end": 3}),
        json!({"start": 0, "end": 12}),
        json!({"start": -1, "end": 3}),
        json!({"start": "a", "end": 3}),
        json!({"end": 3}),
    ] {
        let (status, _) = json_of(&app, Method::PUT, uri, Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    }
    let (status, _) =
        json_of(&app, Method::PUT, "/api/videos/v02/annotations/a.b", Some(json!({"start": 0, "end": 1}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) =
        json_of(&app, Method::PUT, "/api/videos/v09/annotations/U03", Some(json!({"start": 0, "end": 1}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(!dir.path().join("annotations/U03.csv").exists());
}

#[tokio::test]
async fn missing_annotation_is_not_found() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let app = app(dir.path());
    let (status, _) = json_of(&app, Method::GET, "/api/videos/v01/annotations/U01", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = json_of(&app, Method::GET, "/api/videos/v01/annotations/U09", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn corrupt_annotation_file_is_server_error() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let app = app(dir.path());
    fs::write(dir.path().join("annotations/U01.csv"), "video,begin,end\n").unwrap();
    let (status, body) = json_of(&app, Method::GET, "/api/videos/v02/annotations/U01", None).await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
    assert_eq!(body["error"], "Parse");
}

#[tokio::test]
async fn busy_annotator_gives_conflict() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let state = AppState::open(dir.path(), None).with_write_retries(3, Duration::from_millis(1));
    let lock = state.annotator_lock(&AnnotatorId::new("U01").unwrap());
    let app = router(state);
    let held = lock.lock().await;
    let uri = "/api/videos/v01/annotations/U01";
    let (status, body) = json_of(&app, Method::PUT, uri, Some(json!({"start": 1, "end": 2}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "Conflict");

    // other annotators are not blocked
    let (status, _) =
        json_of(&app, Method::PUT, "/api/videos/v01/annotations/U02", Some(json!({"start": 1, "end": 2}))).await;
    assert_eq!(status, StatusCode::OK);

    drop(held);
    let (status, _) = json_of(&app, Method::PUT, uri, Some(json!({"start": 1, "end": 2}))).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_writes_lose_nothing() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    write_video(dir.path(), "v03", 5);
    write_video(dir.path(), "v04", 5);
    fs::write(dir.path().join("scenes.cfg"), "scene_a = v01,v03,v04\nscene_b = v02\n").unwrap();
    let app = router(AppState::open(dir.path(), None).with_write_retries(400, Duration::from_millis(2)));
    let mut tasks = Vec::new();
    for (video, s) in [("v01", 5), ("v02", 1), ("v03", 2), ("v04", 0)] {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            let uri = format!("/api/videos/{video}/annotations/U05");
            json_of(&app, Method::PUT, &uri, Some(json!({"start": s, "end": s + 2}))).await.0
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    assert_eq!(
        fs::read_to_string(dir.path().join("annotations/U05.csv")).unwrap(),
        "video,start,end\nv01,5,7\nv02,1,3\nv03,2,4\nv04,0,2\n"
    );
}

#[tokio::test]
async fn serves_static_ui() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let ui = tempfile::tempdir().unwrap();
    fs::write(ui.path().join("index.html"), "<html>ui</html>").unwrap();
    let app = router(AppState::open(dir.path(), Some(ui.path().to_path_buf())));
    let (status, body) = send(&app, Method::GET, "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<html>ui</html>");
    let (status, _) = send(&app, Method::GET, "/api/videos", None).await;
    assert_eq!(status, StatusCode::OK);
}
