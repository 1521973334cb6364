//! Calling the router in-process, and a random client that scans every
//! response for private fields.

#![allow(dead_code)]

#[path = "../../../core/tests/support/mod.rs"]
pub mod support;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

use socialsim_server::{router, Config};

/// Keys that would reveal scores, preferences or volitions.
pub const PRIVATE_KEYS: [&str; 9] = ["value", "goal", "belief", "likes", "dislikes", "volition", "total", "old", "new"];

pub fn app(debug: bool) -> Router {
    let mut config = Config::builtin();
    config.debug = debug;
    router(config)
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, "GET", uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, "POST", uri, Some(body)).await
}

/// Creates a session and returns its id.
pub async fn create(app: &Router, body: Value) -> String {
    let (status, v) = post(app, "/sessions", body).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

/// Paths (like `events[3].change.old`) of every private key in `v`.
pub fn private_fields(v: &Value, path: &str, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = format!("{path}.{k}");
                if PRIVATE_KEYS.contains(&k.as_str()) {
                    out.push(p.clone());
                }
                private_fields(x, &p, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                private_fields(x, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

/// What a privacy scan saw.
#[derive(Debug, Default)]
pub struct Scan {
    pub responses: usize,
    pub events: usize,
    pub hits: Vec<String>,
}

impl Scan {
    fn look(&mut self, what: &str, v: &Value) {
        self.responses += 1;
        if let Some(events) = v.get("events").and_then(Value::as_array) {
            self.events += events.len();
        }
        let mut found = Vec::new();
        private_fields(v, "", &mut found);
        self.hits.extend(found.into_iter().map(|p| format!("{what}: {p}")));
    }
}

/// Plays a generated scenario through the non-debug endpoints with a random
/// client and scans every response body, errors included.
pub async fn privacy_fuzz(app: &Router, seed: u64, steps: usize, scan: &mut Scan) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let body = match seed % 5 {
        0 => json!({"scenario_id": "house", "seed": seed}),
        1 => json!({"scenario_id": "sandbox", "seed": seed}),
        _ => json!({"scenario_text": support::scenario(seed, support::GenOpts::SMALL), "seed": seed}),
    };
    let (_, created) = post(app, "/sessions", body).await;
    scan.look("create", &created);
    let id = created["session_id"].as_str().unwrap().to_string();
    let base = format!("/sessions/{id}");
    for _ in 0..steps {
        let (_, state) = get(app, &format!("{base}/state")).await;
        scan.look("state", &state);
        let last = state["last_seq"].as_u64().unwrap();
        let since = rng.random_range(0..=last);
        let (what, resp) = if let Some(q) = state["prompt"]["quest"].as_u64().filter(|_| rng.random_bool(0.9)) {
            let choice = *["Accept", "Neutral", "Reject"].choose(&mut rng).unwrap();
            ("respond", post(app, &format!("{base}/player/respond"), json!({"quest_id": q, "choice": choice, "since": since})).await.1)
        } else {
            match rng.random_range(0..10) {
                0..=1 => {
                    // any exchange, with anyone in the cast, here or not
                    let exchanges = state["exchanges"].as_array().unwrap();
                    let cast = state["cast"].as_array().unwrap();
                    let ex = exchanges.choose(&mut rng).unwrap()["id"].clone();
                    let target = cast.choose(&mut rng).unwrap()["id"].clone();
                    let subject = cast.choose(&mut rng).unwrap()["id"].clone();
                    let body = json!({"exchange": ex, "target": target, "subject": subject, "since": since});
                    ("initiate", post(app, &format!("{base}/player/initiate"), body).await.1)
                }
                2 => {
                    let actions = state["actions"].as_array().unwrap();
                    match actions.choose(&mut rng) {
                        Some(a) => {
                            let body = json!({"exchange": a["exchange"], "target": a["target"], "subject": a["subject"]});
                            ("initiate", post(app, &format!("{base}/player/initiate"), body).await.1)
                        }
                        None => ("tick", post(app, &format!("{base}/tick"), json!({})).await.1),
                    }
                }
                3 => {
                    let loc = state["locations"].as_array().unwrap().choose(&mut rng).unwrap().clone();
                    ("move", post(app, &format!("{base}/player/move"), json!({"location": loc})).await.1)
                }
                4 => ("events", get(app, &format!("{base}/events?since={since}")).await.1),
                _ => {
                    let count = rng.random_range(1..4);
                    ("tick", post(app, &format!("{base}/tick"), json!({"count": count, "since": since})).await.1)
                }
            }
        };
        scan.look(what, &resp);
    }
    let (_, all) = get(app, &format!("{base}/events?since=0")).await;
    scan.look("events", &all);
}
