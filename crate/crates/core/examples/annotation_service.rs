//! The annotation backend. With a corpus root it serves until Ctrl-C;
//! without one it builds a throwaway corpus, edits a frame over HTTP and
//! shows the revision conflict a stale editor would get.
//!
//! ```bash
//! cargo run --example annotation_service -- /path/to/corpus 127.0.0.1:8750
//! cargo run --example annotation_service
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use utiv::service::{serve, serve_on, AnnotationSession, FrameResponse, WireLine, REVISION_HEADER};
use utiv::synthetic::{generate_dataset, SyntheticSpec};
use utiv::Script;

#[tokio::main]
async fn demo() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    generate_dataset(&SyntheticSpec::small(1)).write_to(dir.path())?;
    let session = Arc::new(AnnotationSession::open(dir.path())?);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    tokio::spawn(serve_on(listener, session));

    let client = reqwest::Client::new();
    let list: serde_json::Value = client.get(format!("{base}/frames?channel=alpha")).send().await?.json().await?;
    println!("alpha frames: {}", list["total"]);
    let key = list["frames"][0]["key"].as_str().unwrap_or_default().to_string();

    let frame: FrameResponse = client.get(format!("{base}/frames/{key}")).send().await?.json().await?;
    println!("{key}: revision {}, {} lines", frame.revision, frame.annotation.lines.len());

    let mut edited = frame.annotation.clone();
    edited.lines.push(WireLine {
        x: 5,
        y: 5,
        width: 120,
        height: 20,
        script: Script::English,
        transcription: "LIVE".into(),
    });
    for expected in [0, 0] {
        let resp = client
            .put(format!("{base}/frames/{key}"))
            .header(REVISION_HEADER, expected.to_string())
            .json(&edited)
            .send()
            .await?;
        println!("PUT at revision {expected}: {} {}", resp.status(), resp.text().await?);
    }
    let progress: serde_json::Value = client.get(format!("{base}/progress")).send().await?.json().await?;
    println!("progress total: {}", progress["total"]);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    match args.next() {
        Some(root) => {
            let addr = args.next().unwrap_or_else(|| utiv::service::DEFAULT_BIND.into()).parse()?;
            serve(&PathBuf::from(root), addr, false)?;
            Ok(())
        }
        None => demo(),
    }
}
