use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use reqwest::StatusCode;
use utiv::dataset::{dataset_stats, load_dataset};
use utiv::service::{
    serve_on, AnnotationSession, ErrorResponse, FramePage, FrameResponse, Progress, PutResponse, WireAnnotation, WireLine,
    CURRENT_REVISION_HEADER, REVISION_HEADER,
};
use utiv::synthetic::{generate_dataset, SyntheticSpec};
use utiv::Script;

struct Server {
    base: String,
    client: reqwest::Client,
    root: tempfile::TempDir,
}

impl Server {
    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    async fn frame(&self, key: &str) -> FrameResponse {
        self.client.get(self.url(&format!("/frames/{key}"))).send().await.unwrap().json().await.unwrap()
    }

    async fn put(&self, key: &str, body: &WireAnnotation, rev: u64) -> reqwest::Response {
        self.client
            .put(self.url(&format!("/frames/{key}")))
            .header(REVISION_HEADER, rev.to_string())
            .json(body)
            .send()
            .await
            .unwrap()
    }

    async fn progress(&self) -> Progress {
        self.client.get(self.url("/progress")).send().await.unwrap().json().await.unwrap()
    }
}

/// Writes the small synthetic corpus, then strips the annotations of the first
/// `unannotated` frames so they show up as work to do.
async fn start(unannotated: usize) -> Server {
    let root = tempfile::tempdir().unwrap();
    let ds = generate_dataset(&SyntheticSpec::small(17));
    ds.write_to(root.path()).unwrap();
    for f in ds.frames.iter().take(unannotated) {
        std::fs::remove_file(root.path().join(&f.channel).join(&f.video_id).join("gt").join(f.file_name())).unwrap();
    }
    let session = Arc::new(AnnotationSession::open(root.path()).unwrap());
    let listener = tokio::net::TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], 0))).await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve_on(listener, session));
    Server { base: format!("http://{addr}"), client: reqwest::Client::new(), root }
}

fn first_key(root: &Path) -> String {
    load_dataset(root).unwrap().frames[0].key().to_string()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn read_your_writes_and_conflicts() {
    let server = start(0).await;
    let key = first_key(server.root.path());
    let got = server.frame(&key).await;
    assert_eq!((got.revision, got.annotated), (0, true));

    let mut edited = got.annotation.clone();
    edited.lines.push(WireLine { x: 1, y: 1, width: 30, height: 12, script: Script::English, transcription: "NEW".into() });
    let resp = server.put(&key, &edited, 0).await;
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()[CURRENT_REVISION_HEADER], "1");
    assert_eq!(resp.json::<PutResponse>().await.unwrap().revision, 1);

    let after = server.frame(&key).await;
    assert_eq!((after.revision, &after.annotation), (1, &edited));

    let stale = server.put(&key, &got.annotation, 0).await;
    assert_eq!(stale.status(), StatusCode::CONFLICT);
    assert_eq!(stale.json::<ErrorResponse>().await.unwrap().current_revision, Some(1));
    assert_eq!(server.frame(&key).await.annotation, edited);

    let on_disk = load_dataset(server.root.path()).unwrap();
    let written = on_disk.frames.iter().find(|f| f.key().to_string() == key).unwrap();
    assert_eq!(WireAnnotation::from(written), edited);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn error_statuses() {
    let server = start(0).await;
    let key = first_key(server.root.path());
    let c = &server.client;
    assert_eq!(c.get(server.url("/frames/nope_99")).send().await.unwrap().status(), StatusCode::NOT_FOUND);
    assert_eq!(c.get(server.url("/frames/garbage")).send().await.unwrap().status(), StatusCode::NOT_FOUND);
    assert_eq!(c.get(server.url("/frames/nope_99/image")).send().await.unwrap().status(), StatusCode::NOT_FOUND);

    let body = server.frame(&key).await.annotation;
    let missing_header = c.put(server.url(&format!("/frames/{key}"))).json(&body).send().await.unwrap();
    assert_eq!(missing_header.status(), StatusCode::BAD_REQUEST);

    let mut outside = body.clone();
    outside.lines.push(WireLine { x: 890, y: 0, width: 50, height: 10, script: Script::Urdu, transcription: "x".into() });
    let resp = server.put(&key, &outside, 0).await;
    assert_eq!(resp.status(), StatusCode::UNPROCESSABLE_ENTITY);
    let err: ErrorResponse = resp.json().await.unwrap();
    assert_eq!(err.error, "validation");
    assert!(err.details.iter().any(|d| d.contains("exceeds")), "{:?}", err.details);

    let mut moved = body.clone();
    moved.number += 1000;
    assert_eq!(server.put(&key, &moved, 0).await.status(), StatusCode::UNPROCESSABLE_ENTITY);

    let junk = c
        .put(server.url(&format!("/frames/{key}")))
        .header(REVISION_HEADER, "0")
        .body(r#"{"channel": "x", "extra": 1}"#)
        .send()
        .await
        .unwrap();
    assert_eq!(junk.status(), StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(server.put("nope_99", &body, 0).await.status(), StatusCode::NOT_FOUND);
    assert_eq!(server.frame(&key).await.revision, 0);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 8)]
async fn concurrent_writers_on_one_revision() {
    let server = Arc::new(start(0).await);
    let key = first_key(server.root.path());
    let base = server.frame(&key).await.annotation;
    let mut tasks = Vec::new();
    for i in 0..16 {
        let (server, key, mut body) = (server.clone(), key.clone(), base.clone());
        body.lines.truncate(i % 3);
        tasks.push(tokio::spawn(async move { server.put(&key, &body, 0).await.status() }));
    }
    let mut statuses = Vec::new();
    for t in tasks {
        statuses.push(t.await.unwrap());
    }
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::OK).count(), 1, "{statuses:?}");
    assert_eq!(statuses.iter().filter(|s| **s == StatusCode::CONFLICT).count(), 15);
    assert_eq!(server.frame(&key).await.revision, 1);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn images_are_served_verbatim() {
    let server = start(0).await;
    let ds = load_dataset(server.root.path()).unwrap();
    let f = &ds.frames[3];
    let path = server.root.path().join(&f.channel).join(&f.video_id).join("frames").join(format!("{}.png", f.key()));
    let resp = server.client.get(server.url(&format!("/frames/{}/image", f.key()))).send().await.unwrap();
    assert_eq!(resp.headers()["content-type"], "image/png");
    assert_eq!(resp.bytes().await.unwrap().as_ref(), std::fs::read(path).unwrap().as_slice());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn progress_tracks_the_corpus() {
    // complete corpus
    let server = start(0).await;
    let stats = dataset_stats(&load_dataset(server.root.path()).unwrap());
    let p = server.progress().await;
    assert_eq!(p.total.annotated, stats.total.frames);
    assert_eq!(p.total.unannotated, 0);
    assert_eq!((p.total.urdu_lines, p.total.english_lines), (stats.total.urdu_lines, stats.total.english_lines));
    for (c, s) in p.channels.iter().zip(&stats.channels) {
        assert_eq!((&c.channel, c.annotated, c.urdu_lines, c.english_lines), (&s.channel, s.frames, s.urdu_lines, s.english_lines));
    }

    // partially annotated
    let server = start(5).await;
    let stats = dataset_stats(&load_dataset(server.root.path()).unwrap());
    let p = server.progress().await;
    assert_eq!((p.total.annotated, p.total.unannotated), (15, 5));
    assert_eq!((p.total.urdu_lines, p.total.english_lines), (stats.total.urdu_lines, stats.total.english_lines));

    let page: FramePage = server.client.get(server.url("/frames?per_page=100")).send().await.unwrap().json().await.unwrap();
    let todo = page.frames.iter().find(|f| !f.annotated).unwrap();
    let blank = server.frame(&todo.key).await;
    assert!(!blank.annotated && blank.annotation.lines.is_empty());
    let mut body = blank.annotation;
    body.lines.push(WireLine { x: 10, y: 10, width: 100, height: 20, script: Script::Urdu, transcription: "خبر".into() });
    assert_eq!(server.put(&todo.key, &body, 0).await.status(), StatusCode::OK);
    let after = server.progress().await;
    assert_eq!((after.total.annotated, after.total.unannotated), (16, 4));
    assert_eq!(after.total.urdu_lines, p.total.urdu_lines + 1);

    // nothing annotated
    let server = start(20).await;
    let p = server.progress().await;
    assert_eq!((p.total.annotated, p.total.unannotated, p.total.urdu_lines), (0, 20, 0));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn listing_pages_and_filters() {
    let server = start(0).await;
    let get = |q: &'static str| {
        let c = server.client.clone();
        let url = server.url(q);
        async move { c.get(url).send().await.unwrap().json::<FramePage>().await.unwrap() }
    };
    let all = get("/frames?per_page=7").await;
    assert_eq!((all.total, all.frames.len()), (20, 7));
    let mut keys: Vec<String> = Vec::new();
    for page in 0..3 {
        let p = server.client.get(server.url(&format!("/frames?per_page=7&page={page}"))).send().await.unwrap().json::<FramePage>().await.unwrap();
        keys.extend(p.frames.into_iter().map(|f| f.key));
    }
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 20);

    let alpha = get("/frames?channel=alpha&per_page=100").await;
    assert_eq!(alpha.total, 8);
    assert!(alpha.frames.iter().all(|f| f.channel == "alpha"));
    let none = get("/frames?channel=nobody").await;
    assert_eq!((none.total, none.frames.len()), (0, 0));
    let past_end = get("/frames?page=9").await;
    assert!(past_end.frames.is_empty() && past_end.total == 20);
}
