//! Review service over HTTP, driven from a client.
//!
//! ```bash
//! cargo run --release --example review_server -- [--hold]
//! ```
//!
//! Starts the service on a free loopback port, performs a toggle, a label
//! set and an undo through the API, and exports the result. With `--hold`
//! the service keeps running for a browser until Enter is pressed.

use std::sync::Arc;

use qlfseg::phantom::{generate, PhantomParams};
use qlfseg::pipeline::{segment, PipelineConfig};
use qlfseg::service::{ApiSessionState, BackgroundServer, SessionStore, SessionSummary};
use qlfseg::session::{EditOutcome, Session};
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hold = std::env::args().any(|a| a == "--hold");
    let store = Arc::new(SessionStore::new("review_out"));
    for seed in [1, 2] {
        let phantom = generate(seed, &PhantomParams::default());
        let result = segment(
            &phantom.image,
            &PipelineConfig::default(),
            &format!("phantom_{seed}.png"),
        )?;
        store.insert(Session::new(result)?, phantom.image)?;
    }

    let server = BackgroundServer::start(store, "127.0.0.1", 0)?;
    let base = server.url();
    println!("listening on {base}");
    let http = reqwest::blocking::Client::new();

    let sessions: Vec<SessionSummary> = http.get(format!("{base}/api/sessions")).send()?.json()?;
    let id = &sessions[0].session_id;
    let state: ApiSessionState = http
        .get(format!("{base}/api/sessions/{id}"))
        .send()?
        .json()?;
    println!(
        "{} sessions; {id} has {} superpixels, bqi {:.4}",
        sessions.len(),
        state.superpixel_count,
        state.bqi
    );

    let t: EditOutcome = http
        .post(format!("{base}/api/sessions/{id}/toggle"))
        .json(&json!({"x": 320, "y": 240}))
        .send()?
        .json()?;
    println!(
        "toggle: superpixel {} {} -> {}, bqi {:.4}, revision {}",
        t.superpixel, t.old_label, t.new_label, t.bqi, t.revision
    );

    let s: EditOutcome = http
        .post(format!("{base}/api/sessions/{id}/label"))
        .json(&json!({"superpixel": 0, "label": "background"}))
        .send()?
        .json()?;
    println!(
        "label: superpixel 0 -> {}, revision {}",
        s.new_label, s.revision
    );

    let u: EditOutcome = http
        .post(format!("{base}/api/sessions/{id}/undo"))
        .send()?
        .json()?;
    println!("undo: revision {}, bqi {:.4}", u.revision, u.bqi);

    let oob = http
        .post(format!("{base}/api/sessions/{id}/toggle"))
        .json(&json!({"x": -1, "y": 5}))
        .send()?;
    println!(
        "out-of-bounds click: HTTP {} {}",
        oob.status().as_u16(),
        oob.text()?
    );

    let png = http.get(format!("{base}{}", state.overlay_url)).send()?;
    let kind = png.headers()["content-type"].to_str()?.to_string();
    println!("overlay: {} bytes of {kind}", png.bytes()?.len());

    let paths: serde_json::Value = http
        .post(format!("{base}/api/sessions/{id}/export"))
        .send()?
        .json()?;
    println!("exported {paths}");

    if hold {
        println!("press Enter to stop");
        std::io::stdin().read_line(&mut String::new())?;
    }
    server.shutdown()?;
    Ok(())
}
