//! Serves the bundled corpus over HTTP on an ephemeral port, issues a few
//! requests against it and shuts down.
//!
//! For a long-running server use the binary: `barrierlens serve --config service.toml`.

use std::sync::Arc;

use barrierlens::service::{serve_listener, AppState, DiskCache, Snapshot, SnapshotSources};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cache_dir = tempfile::tempdir()?;
    let state =
        AppState::new(Snapshot::build(&SnapshotSources::bundled())?, DiskCache::open(cache_dir.path(), 64)?, None);

    let runtime = tokio::runtime::Runtime::new()?;
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let base = format!("http://{}", listener.local_addr()?);
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = runtime.spawn(serve_listener(listener, Arc::new(state), async {
        let _ = stopped.await;
    }));

    let get = |path: &str| -> Result<(String, String), Box<dyn std::error::Error>> {
        let mut response = ureq::get(&format!("{base}{path}")).config().http_status_as_error(false).build().call()?;
        let cache = response.headers().get("x-cache").and_then(|v| v.to_str().ok()).unwrap_or("-").to_string();
        Ok((format!("{} {cache}", response.status()), response.body_mut().read_to_string()?))
    };
    println!("{}", get("/api/events")?.1);
    println!("{}", get("/api/barriers/political/labels?event=israel-hamas-war")?.1);
    for _ in 0..2 {
        let (status, body) = get("/api/analyses/trends?event=israel-hamas-war&barrier=economic&bin=week")?;
        println!("trends: {status}, {} bytes", body.len());
    }
    let (status, body) = get("/api/analyses/propagation?event=israel-hamas-war&tau=1.01")?;
    println!("bad tau: {status} {body}");

    let _ = stop.send(());
    runtime.block_on(server)??;
    Ok(())
}
