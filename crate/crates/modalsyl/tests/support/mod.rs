#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use modalsyl::study::{KeyMapping, TrialRecord};
use modalsyl_core::realize::QuestionItem;
use modalsyl_core::Label;
use rand::Rng;
use serde::Deserialize;
use serde_json::{json, Value};

pub const CORPUS: &str = include_str!("corpus.txt");

/// Serve `router` on an ephemeral local port from a background thread.
pub fn spawn(router: Router) -> String {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            axum::serve(listener, router).await.unwrap();
        });
    });
    format!("http://{addr}")
}

/// Byte-level n-gram language model with recursive additive interpolation.
pub struct CharNgram {
    order: usize,
    counts: HashMap<Vec<u8>, (u32, HashMap<u8, u32>)>,
}

const BACKOFF_WEIGHT: f64 = 2.0;

impl CharNgram {
    pub fn train(text: &str, order: usize) -> CharNgram {
        let bytes = text.as_bytes();
        let mut counts: HashMap<Vec<u8>, (u32, HashMap<u8, u32>)> = HashMap::new();
        for i in 0..bytes.len() {
            for k in 0..order.min(i + 1) {
                let ctx = bytes[i - k..i].to_vec();
                let e = counts.entry(ctx).or_default();
                e.0 += 1;
                *e.1.entry(bytes[i]).or_default() += 1;
            }
        }
        CharNgram { order, counts }
    }

    fn prob(&self, ctx: &[u8], c: u8) -> f64 {
        let (total, next) = match self.counts.get(&[][..]) {
            Some(e) => (e.0, &e.1),
            None => return 1.0 / 256.0,
        };
        let mut p = (f64::from(*next.get(&c).unwrap_or(&0)) + 1.0) / (f64::from(total) + 256.0);
        for k in 1..self.order.min(ctx.len() + 1) {
            let Some((n, next)) = self.counts.get(&ctx[ctx.len() - k..]) else { break };
            p = (f64::from(*next.get(&c).unwrap_or(&0)) + BACKOFF_WEIGHT * p) / (f64::from(*n) + BACKOFF_WEIGHT);
        }
        p
    }

    /// Log-probability of `text` following `context`.
    pub fn logp(&self, context: &[u8], text: &[u8]) -> f64 {
        let mut buf = context.to_vec();
        let mut total = 0.0;
        for &c in text {
            total += self.prob(&buf, c).ln();
            buf.push(c);
        }
        total
    }

    /// Per-word log-probabilities; each token is a word with its leading space.
    pub fn token_logps(&self, text: &str) -> Vec<f64> {
        let bytes = text.as_bytes();
        let mut starts: Vec<usize> = vec![0];
        starts.extend((1..bytes.len()).filter(|&i| bytes[i] == b' ' || bytes[i] == b'\n'));
        starts.push(bytes.len());
        starts.dedup();
        starts.windows(2).map(|w| self.logp(&bytes[..w[0]], &bytes[w[0]..w[1]])).collect()
    }
}

#[derive(Deserialize)]
struct ScoreRequest {
    model: String,
    prompt: String,
    candidates: Vec<String>,
    echo_prompt: bool,
}

async fn score(State(models): State<Arc<HashMap<String, CharNgram>>>, Json(req): Json<ScoreRequest>) -> Response {
    let Some(lm) = models.get(&req.model) else {
        return (StatusCode::NOT_FOUND, Json(json!({"error": "unknown model"}))).into_response();
    };
    let cands: Vec<f64> = req.candidates.iter().map(|c| lm.logp(req.prompt.as_bytes(), c.as_bytes())).collect();
    let mut body = json!({ "candidate_logprobs": cands });
    if req.echo_prompt {
        body["prompt_token_logprobs"] = json!(lm.token_logps(&req.prompt));
    }
    Json(body).into_response()
}

/// A native-protocol scoring endpoint over the given named n-gram models.
pub fn ngram_endpoint(models: Vec<(&str, usize)>) -> String {
    let map: HashMap<String, CharNgram> =
        models.into_iter().map(|(name, order)| (name.to_string(), CharNgram::train(CORPUS, order))).collect();
    spawn(Router::new().route("/score", post(score)).with_state(Arc::new(map))) + "/score"
}

/// Run one simulated participant through a session and return its id and mapping.
/// Accuracy is higher on valid items and reaction times fall in [400, 3000) ms.
pub fn simulate_participant<R: Rng>(
    http: &reqwest::blocking::Client,
    base: &str,
    pool: &HashMap<String, QuestionItem>,
    rng: &mut R,
) -> (String, KeyMapping) {
    let created: Value = http.post(format!("{base}/sessions")).send().unwrap().json().unwrap();
    let id = created["session_id"].as_str().unwrap().to_string();
    let mapping: KeyMapping = serde_json::from_value(created["key_mapping"].clone()).unwrap();
    let skill = rng.gen_range(0.6..0.9);
    loop {
        let next: Value = http.get(format!("{base}/sessions/{id}/next")).send().unwrap().json().unwrap();
        if next["status"] == "done" {
            break;
        }
        let item_id = next["item_id"].as_str().unwrap();
        let truth = pool[item_id].ground_truth;
        let p = if truth == Label::Yes { skill } else { skill - 0.2 };
        let answer = if rng.gen_bool(p) { truth } else { flip(truth) };
        let key = match (mapping, answer) {
            (KeyMapping::FYes, Label::Yes) | (KeyMapping::FNo, Label::No) => "F",
            _ => "J",
        };
        let rt: f64 = rng.gen_range(400.0..3000.0);
        let resp = http
            .post(format!("{base}/sessions/{id}/responses"))
            .json(&json!({"item_id": item_id, "key": key, "rt_ms": rt}))
            .send()
            .unwrap();
        assert!(resp.status().is_success(), "{}", resp.text().unwrap());
    }
    (id, mapping)
}

fn flip(l: Label) -> Label {
    match l {
        Label::Yes => Label::No,
        Label::No => Label::Yes,
    }
}

pub fn export(http: &reqwest::blocking::Client, base: &str) -> Vec<TrialRecord> {
    let text = http.get(format!("{base}/export")).send().unwrap().text().unwrap();
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}
