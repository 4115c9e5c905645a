use std::fs;
use std::path::Path;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use barrierlens::data::{SYNTHETIC_CORPUS_JSONL, SYNTHETIC_EVENT, SYNTHETIC_PUBLISHERS_CSV};
use barrierlens::service::{router, serve_listener, AppState, DiskCache, Snapshot, SnapshotSources};
use barrierlens::AnalysisDocument;
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

struct Harness {
    app: Router,
    state: Arc<AppState>,
    cache: TempDir,
    _static: TempDir,
}

fn harness() -> Harness {
    let cache = tempfile::tempdir().unwrap();
    let web = tempfile::tempdir().unwrap();
    fs::write(web.path().join("index.html"), "<html>app</html>").unwrap();
    fs::create_dir(web.path().join("assets")).unwrap();
    fs::write(web.path().join("assets/app.js"), "console.log(1)").unwrap();
    let snapshot = Snapshot::build(&SnapshotSources::bundled()).unwrap();
    let state =
        Arc::new(AppState::new(snapshot, DiskCache::open(cache.path(), 64).unwrap(), Some(web.path().to_path_buf())));
    Harness { app: router(state.clone()), state, cache, _static: web }
}

struct Reply {
    status: StatusCode,
    cache: Option<String>,
    content_type: Option<String>,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap()
    }
}

async fn send(app: &Router, request: Request<Body>) -> Reply {
    let response = app.clone().oneshot(request).await.unwrap();
    let (status, cache, content_type) = {
        let header = |name: &str| response.headers().get(name).map(|v| v.to_str().unwrap().to_string());
        (response.status(), header("x-cache"), header("content-type"))
    };
    let body = to_bytes(response.into_body(), usize::MAX).await.unwrap().to_vec();
    Reply { status, cache, content_type, body }
}

async fn get(app: &Router, uri: &str) -> Reply {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post(app: &Router, uri: &str, body: &str) -> Reply {
    send(app, Request::post(uri).header("content-type", "application/json").body(Body::from(body.to_string())).unwrap())
        .await
}

#[tokio::test]
async fn events_and_labels() {
    let h = harness();
    let events = get(&h.app, "/api/events").await;
    assert_eq!(events.status, StatusCode::OK);
    assert_eq!(events.json(), json!([SYNTHETIC_EVENT]));

    let labels = get(&h.app, &format!("/api/barriers/political/labels?event={SYNTHETIC_EVENT}")).await;
    assert_eq!(labels.status, StatusCode::OK);
    let rows = labels.json();
    let total: u64 = rows.as_array().unwrap().iter().map(|r| r["count"].as_u64().unwrap()).sum();
    assert_eq!(total, 500);
    assert!(rows.as_array().unwrap().iter().any(|r| r["label"] == "Unknown"));

    let bad = get(&h.app, &format!("/api/barriers/religious/labels?event={SYNTHETIC_EVENT}")).await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    assert_eq!(bad.json()["details"]["field"], "kind");
}

#[tokio::test]
async fn error_envelopes() {
    let h = harness();
    let cases = [
        ("/api/analyses/trends?event=nope", StatusCode::NOT_FOUND, "unknown_event"),
        ("/api/analyses/forecast?event=x", StatusCode::NOT_FOUND, "unknown_analysis"),
        ("/api/analyses/propagation?event=israel-hamas-war&tau=1.01", StatusCode::BAD_REQUEST, "validation_error"),
        ("/api/analyses/propagation?event=israel-hamas-war&tau=abc", StatusCode::BAD_REQUEST, "validation_error"),
        ("/api/analyses/trends?event=israel-hamas-war&bin=fortnight", StatusCode::BAD_REQUEST, "validation_error"),
        ("/api/analyses/trends?event=israel-hamas-war&tau=0.5", StatusCode::BAD_REQUEST, "validation_error"),
        ("/api/analyses/topics?event=israel-hamas-war&k=0", StatusCode::BAD_REQUEST, "validation_error"),
        ("/api/analyses/sentiment", StatusCode::BAD_REQUEST, "validation_error"),
        (
            "/api/analyses/sentiment?event=israel-hamas-war&from=2023-11-10&to=2023-11-01",
            StatusCode::BAD_REQUEST,
            "validation_error",
        ),
        ("/api/nothing", StatusCode::NOT_FOUND, "not_found"),
    ];
    for (uri, status, code) in cases {
        let reply = get(&h.app, uri).await;
        assert_eq!(reply.status, status, "{uri}");
        let body = reply.json();
        assert_eq!(body["error"], code, "{uri}");
        assert!(body["message"].as_str().is_some_and(|m| !m.is_empty()));
        assert!(body.get("details").is_some());
    }
    let tau = get(&h.app, "/api/analyses/propagation?event=israel-hamas-war&tau=1.01").await;
    assert_eq!(tau.json()["details"]["field"], "tau");
}

#[tokio::test]
async fn repeated_request_is_a_byte_identical_hit() {
    let h = harness();
    let uri = "/api/analyses/trends?event=israel-hamas-war&barrier=economic&bin=week";
    let first = get(&h.app, uri).await;
    assert_eq!(first.status, StatusCode::OK);
    assert_eq!(first.cache.as_deref(), Some("miss"));
    assert_eq!(first.content_type.as_deref(), Some("application/json"));
    let second = get(&h.app, uri).await;
    assert_eq!(second.cache.as_deref(), Some("hit"));
    assert_eq!(first.body, second.body);

    // Spelling out defaults or reordering keys lands on the same entry.
    let explicit =
        get(&h.app, "/api/analyses/trends?bin=week&cumulative=false&barrier=economic&event=israel-hamas-war").await;
    assert_eq!(explicit.cache.as_deref(), Some("hit"));
    assert_eq!(explicit.body, first.body);

    let doc = AnalysisDocument::from_json(&first.body).unwrap();
    assert_eq!(doc.name(), "trends");
    assert_eq!(doc.to_bytes(), first.body);
}

#[tokio::test]
async fn post_body_equals_query_string() {
    let h = harness();
    let q = get(&h.app, "/api/analyses/topics?event=israel-hamas-war&k=4&m=5").await;
    let p = post(&h.app, "/api/analyses/topics", r#"{"event":"israel-hamas-war","k":4,"m":"5"}"#).await;
    assert_eq!(q.status, StatusCode::OK);
    assert_eq!(p.status, StatusCode::OK);
    assert_eq!(p.cache.as_deref(), Some("hit"));
    assert_eq!(q.body, p.body);
    let doc = q.json();
    assert_eq!(doc["analysis"], "topics");
    assert_eq!(doc["topics"].as_array().unwrap().len(), 4);

    let bad = post(&h.app, "/api/analyses/topics", "{not json").await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    assert_eq!(bad.json()["details"]["field"], "body");
}

#[tokio::test]
async fn every_analysis_serves_its_document_shape() {
    let h = harness();
    let propagation = get(&h.app, "/api/analyses/propagation?event=israel-hamas-war&barrier=political").await.json();
    assert_eq!(propagation["analysis"], "propagation");
    assert_eq!(propagation["nodes"].as_array().unwrap().len(), 500);
    assert!(propagation["edges"].as_array().unwrap().iter().all(|e| e["weight"].as_f64().unwrap() >= 0.6));

    let heatmap =
        get(&h.app, "/api/analyses/sentiment?event=israel-hamas-war&from=2023-11-01&to=2023-11-08").await.json();
    assert_eq!(heatmap["analysis"], "sentiment");
    let labels = heatmap["labels"].as_array().unwrap().len();
    assert_eq!(heatmap["days"].as_array().unwrap().len(), 7);
    assert_eq!(heatmap["cells"].as_array().unwrap().len(), 7);
    for row in heatmap["cells"].as_array().unwrap() {
        assert_eq!(row.as_array().unwrap().len(), labels);
        for cell in row.as_array().unwrap() {
            assert!(cell.is_null() || cell.as_f64().is_some_and(|v| v > -1.0 && v < 1.0));
        }
    }
}

#[tokio::test]
async fn static_files_and_traversal_guard() {
    let h = harness();
    let index = get(&h.app, "/").await;
    assert_eq!(index.status, StatusCode::OK);
    assert_eq!(index.body, b"<html>app</html>");
    assert!(index.content_type.unwrap().starts_with("text/html"));

    let js = get(&h.app, "/assets/app.js").await;
    assert_eq!(js.body, b"console.log(1)");
    assert!(js.content_type.unwrap().starts_with("text/javascript"));

    // Client-side routes fall back to the app shell; missing assets do not.
    assert_eq!(get(&h.app, "/graph/view").await.body, b"<html>app</html>");
    assert_eq!(get(&h.app, "/assets/missing.css").await.status, StatusCode::NOT_FOUND);

    fs::write(h.cache.path().join("secret.txt"), "s").unwrap();
    for uri in ["/../secret.txt", "/assets/../../secret.txt", "/%2e%2e/secret.txt", "/assets/..%2F..%2Fsecret.txt"] {
        let reply = get(&h.app, uri).await;
        assert_ne!(reply.body, b"s", "{uri}");
        assert!(reply.status == StatusCode::NOT_FOUND || reply.status == StatusCode::OK, "{uri}");
    }
}

#[tokio::test]
async fn reload_without_config_is_a_conflict() {
    let h = harness();
    let reply = post(&h.app, "/api/reload", "").await;
    assert_eq!(reply.status, StatusCode::CONFLICT);
    assert_eq!(reply.json()["error"], "unavailable");
}

fn write_config(dir: &Path, corpora: &[&str]) {
    fs::write(dir.join("publishers.csv"), SYNTHETIC_PUBLISHERS_CSV).unwrap();
    let mut raw = String::from("cache_dir = \"cache\"\n[barriers]\npublishers = \"publishers.csv\"\n[corpora]\n");
    for tag in corpora {
        fs::write(dir.join(format!("{tag}.jsonl")), SYNTHETIC_CORPUS_JSONL).unwrap();
        raw.push_str(&format!("{tag} = \"{tag}.jsonl\"\n"));
    }
    fs::write(dir.join("service.toml"), &raw).unwrap();
}

#[tokio::test]
async fn reload_picks_up_new_corpora() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), &["alpha"]);
    let state = Arc::new(AppState::from_config_file(dir.path().join("service.toml")).unwrap());
    let app = router(state.clone());
    assert_eq!(get(&app, "/api/events").await.json(), json!(["alpha"]));
    let before = state.snapshot().id().to_string();

    write_config(dir.path(), &["alpha", "beta"]);
    let reply = post(&app, "/api/reload", "").await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(reply.json()["events"], json!(["alpha", "beta"]));
    assert_ne!(state.snapshot().id(), before);
    assert_eq!(get(&app, "/api/events").await.json(), json!(["alpha", "beta"]));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_identical_requests_compute_once() {
    let h = harness();
    let uri = "/api/analyses/sentiment?event=israel-hamas-war&barrier=economic";
    let replies = futures_join(&h.app, uri, 8).await;
    let misses = replies.iter().filter(|r| r.cache.as_deref() == Some("miss")).count();
    assert_eq!(misses, 1);
    assert!(replies.iter().all(|r| r.status == StatusCode::OK && r.body == replies[0].body));
    assert_eq!(h.state.snapshot().events(), vec![SYNTHETIC_EVENT]);
}

async fn futures_join(app: &Router, uri: &str, n: usize) -> Vec<Reply> {
    let tasks: Vec<_> = (0..n)
        .map(|_| {
            let (app, uri) = (app.clone(), uri.to_string());
            tokio::spawn(async move { get(&app, &uri).await })
        })
        .collect();
    let mut out = Vec::new();
    for t in tasks {
        out.push(t.await.unwrap());
    }
    out
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn real_socket_round_trip() {
    let h = harness();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(serve_listener(listener, h.state.clone(), async {
        let _ = stopped.await;
    }));
    let body = tokio::task::spawn_blocking(move || {
        let mut response = ureq::get(&format!("http://{addr}/api/events")).call().unwrap();
        response.body_mut().read_to_string().unwrap()
    })
    .await
    .unwrap();
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap(), json!([SYNTHETIC_EVENT]));
    stop.send(()).unwrap();
    server.await.unwrap().unwrap();
}
