use std::sync::Arc;

use qlfseg::color::{load_image, RgbImage};
use qlfseg::divergence::ClassLabel;
use qlfseg::phantom::{generate, PhantomParams};
use qlfseg::pipeline::{segment, PipelineConfig};
use qlfseg::render::{decode_label_id, render_overlay};
use qlfseg::service::{ApiError, ApiSessionState, BackgroundServer, SessionStore, SessionSummary};
use qlfseg::session::{EditOutcome, Session};
use qlfseg::superpixel::SlicParams;
use qlfseg::Error;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};
use tempfile::TempDir;

struct Fixture {
    server: BackgroundServer,
    http: Client,
    id: String,
    /// In-process copy of the served session, used as the oracle.
    oracle: Session,
    source: RgbImage,
    out: TempDir,
}

impl Fixture {
    fn new(export_on_edit: bool) -> Self {
        let phantom = generate(
            13,
            &PhantomParams {
                width: 200,
                height: 150,
                ..PhantomParams::default()
            },
        );
        let cfg = PipelineConfig {
            slic: SlicParams::with_k(120),
            ..PipelineConfig::default()
        };
        let result = segment(&phantom.image, &cfg, "jaw_13.png").unwrap();
        let session = Session::new(result).unwrap();
        let out = TempDir::new().unwrap();
        let store = Arc::new(SessionStore::new(out.path()).export_on_edit(export_on_edit));
        let id = store
            .insert(session.clone(), phantom.image.clone())
            .unwrap();
        let server = BackgroundServer::start(store, "127.0.0.1", 0).unwrap();
        Self {
            server,
            http: Client::new(),
            id,
            oracle: session,
            source: phantom.image,
            out,
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}/api/sessions/{}{path}", self.server.url(), self.id)
    }

    fn state(&self) -> ApiSessionState {
        self.http.get(self.url("")).send().unwrap().json().unwrap()
    }

    fn post(&self, path: &str, body: Value) -> reqwest::blocking::Response {
        self.http.post(self.url(path)).json(&body).send().unwrap()
    }

    fn toggle(&self, x: i64, y: i64) -> EditOutcome {
        let r = self.post("/toggle", json!({"x": x, "y": y}));
        assert_eq!(r.status(), StatusCode::OK);
        r.json().unwrap()
    }
}

#[test]
fn listing_and_state() {
    let f = Fixture::new(false);
    let list: Vec<SessionSummary> = f
        .http
        .get(format!("{}/api/sessions", f.server.url()))
        .send()
        .unwrap()
        .json()
        .unwrap();
    assert_eq!(
        list,
        vec![SessionSummary {
            session_id: f.id.clone(),
            image_id: "jaw_13.png".into(),
        }]
    );

    let st = f.state();
    assert_eq!(st.session_id, f.id);
    assert_eq!((st.width, st.height), (200, 150));
    assert_eq!(st.superpixel_count, f.oracle.result().map.len());
    assert_eq!(st.labels, f.oracle.labels());
    assert_eq!(st.bqi, f.oracle.bqi());
    assert_eq!(st.revision, 0);
}

#[test]
fn edits_match_in_process_session() {
    let mut f = Fixture::new(false);
    let clicks = [
        (10, 10),
        (100, 75),
        (100, 75),
        (150, 40),
        (199, 149),
        (0, 0),
    ];
    for (x, y) in clicks {
        let served = f.toggle(x, y);
        let expect = f.oracle.toggle_label(x, y).unwrap();
        assert_eq!(served, expect);
        // Read-your-writes.
        let st = f.state();
        assert_eq!((st.bqi, st.revision), (served.bqi, served.revision));
        assert_eq!(st.labels, f.oracle.labels());
    }

    let r = f.post("/label", json!({"superpixel": 3, "label": "biofilm"}));
    assert_eq!(r.status(), StatusCode::OK);
    let served: EditOutcome = r.json().unwrap();
    assert_eq!(served, f.oracle.set_label(3, ClassLabel::Biofilm).unwrap());

    let r = f.http.post(f.url("/undo")).send().unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    let undone: EditOutcome = r.json().unwrap();
    let edit = f.oracle.undo().unwrap();
    assert_eq!(undone.superpixel, edit.superpixel);
    assert_eq!(
        (undone.old_label, undone.new_label),
        (edit.new_label, edit.old_label)
    );
    assert_eq!(
        (undone.bqi, undone.revision),
        (f.oracle.bqi(), f.oracle.revision())
    );
    let st = f.state();
    assert_eq!(st.revision, clicks.len() as u64);
    assert_eq!(st.labels, f.oracle.labels());
}

#[test]
fn structured_errors() {
    let f = Fixture::new(false);
    let check = |r: reqwest::blocking::Response, status: StatusCode, code: &str| {
        assert_eq!(r.status(), status);
        let body: ApiError = r.json().unwrap();
        assert_eq!(body.error, code);
        assert!(!body.message.is_empty());
    };
    check(
        f.post("/toggle", json!({"x": 200, "y": 3})),
        StatusCode::UNPROCESSABLE_ENTITY,
        "out_of_bounds",
    );
    check(
        f.post("/toggle", json!({"x": -1, "y": 3})),
        StatusCode::UNPROCESSABLE_ENTITY,
        "out_of_bounds",
    );
    check(
        f.post("/toggle", json!({"x": "a"})),
        StatusCode::UNPROCESSABLE_ENTITY,
        "invalid_request",
    );
    check(
        f.post("/label", json!({"superpixel": 100000, "label": "tooth"})),
        StatusCode::UNPROCESSABLE_ENTITY,
        "unknown_superpixel",
    );
    check(
        f.post("/label", json!({"superpixel": 0, "label": "enamel"})),
        StatusCode::UNPROCESSABLE_ENTITY,
        "invalid_request",
    );
    check(
        f.http.post(f.url("/undo")).send().unwrap(),
        StatusCode::UNPROCESSABLE_ENTITY,
        "nothing_to_undo",
    );
    let missing = format!("{}/api/sessions/nope", f.server.url());
    check(
        f.http.get(&missing).send().unwrap(),
        StatusCode::NOT_FOUND,
        "unknown_session",
    );
    check(
        f.http
            .post(format!("{missing}/toggle"))
            .json(&json!({"x": 1, "y": 1}))
            .send()
            .unwrap(),
        StatusCode::NOT_FOUND,
        "unknown_session",
    );
    // Failed requests never change the session.
    assert_eq!(f.state().revision, 0);
}

fn png(f: &Fixture, path: &str) -> RgbImage {
    let r = f.http.get(f.url(path)).send().unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    assert_eq!(r.headers()["content-type"], "image/png");
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("x.png");
    std::fs::write(&file, r.bytes().unwrap()).unwrap();
    load_image(&file).unwrap()
}

#[test]
fn images_round_trip() {
    let mut f = Fixture::new(false);
    assert_eq!(png(&f, "/image.png"), f.source);

    let ids = png(&f, "/labelmap.png");
    let map = f.oracle.result().map.clone();
    for (p, &rgb) in ids.pixels().iter().enumerate() {
        assert_eq!(decode_label_id(rgb), map.labels()[p]);
    }

    f.toggle(50, 60);
    f.oracle.toggle_label(50, 60).unwrap();
    let overlay = png(&f, "/overlay.png");
    assert_eq!(overlay, render_overlay(&f.source, &map, f.oracle.labels()));
}

#[test]
fn export_writes_current_state() {
    let mut f = Fixture::new(false);
    f.toggle(100, 75);
    f.oracle.toggle_label(100, 75).unwrap();
    let r = f.http.post(f.url("/export")).send().unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    let paths: Value = r.json().unwrap();
    let report_path = paths["report"].as_str().unwrap();
    assert!(report_path.starts_with(f.out.path().to_str().unwrap()));
    let report: qlfseg::quant::QuantReport =
        serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    let (labels, expect) = f.oracle.export_result();
    assert_eq!(report, expect);
    assert_eq!(
        load_image(paths["labels"].as_str().unwrap()).unwrap(),
        labels
    );
}

#[test]
fn export_on_edit_rewrites_report() {
    let f = Fixture::new(true);
    let report = f.out.path().join("jaw_13_report.json");
    assert!(!report.exists());
    let o = f.toggle(20, 30);
    let written: qlfseg::quant::QuantReport =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!((written.bqi, written.revision), (o.bqi, 1));
    f.http.post(f.url("/undo")).send().unwrap();
    let written: qlfseg::quant::QuantReport =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(written.revision, 0);
}

#[test]
fn concurrent_toggles_are_serialized() {
    let f = Fixture::new(false);
    let threads = 4;
    let per = 15;
    std::thread::scope(|scope| {
        for t in 0..threads {
            let f = &f;
            scope.spawn(move || {
                for i in 0..per {
                    f.toggle((t * 40 + i) as i64, (i * 9) as i64);
                }
            });
        }
    });
    let st = f.state();
    assert_eq!(st.revision, (threads * per) as u64);
    // Every toggle of a superpixel advances it one step, whatever the order.
    let mut expect = f.oracle.clone();
    for t in 0..threads {
        for i in 0..per {
            expect
                .toggle_label((t * 40 + i) as i64, (i * 9) as i64)
                .unwrap();
        }
    }
    assert_eq!(st.labels, expect.labels());
    assert_eq!(st.bqi, expect.bqi());
}

#[test]
fn busy_port_is_a_startup_error() {
    let busy = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = busy.local_addr().unwrap().port();
    let store = Arc::new(SessionStore::new(std::env::temp_dir()));
    match BackgroundServer::start(store, "127.0.0.1", port) {
        Err(Error::Bind { .. }) => {}
        Err(e) => panic!("unexpected error {e}"),
        Ok(_) => panic!("bound a busy port"),
    }
}

#[test]
fn shutdown_stops_serving() {
    let f = Fixture::new(false);
    let url = f.url("");
    f.server.shutdown().unwrap();
    assert!(Client::new().get(url).send().is_err());
}
