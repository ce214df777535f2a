mod support;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::post;
use axum::{Json, Router};
use modalsyl::dataset::{generate, GenerateConfig};
use modalsyl::eval::{Api, Candidates, EvalError, HttpClient, RetryPolicy, ScoringClient};
use modalsyl_core::metrics::logsumexp;
use modalsyl_core::realize::QuestionItem;
use modalsyl_core::Family;
use serde_json::{json, Value};

fn item() -> QuestionItem {
    generate(&GenerateConfig { families: vec![Family::Main24], n: 1, seed: 42, lexicon: modalsyl::lexicon::natural() })
        .unwrap()
        .remove(0)
}

fn fast() -> RetryPolicy {
    RetryPolicy { max_retries: 3, base_delay: Duration::from_millis(1) }
}

#[test]
fn native_protocol_pools_variants() {
    let url = support::ngram_endpoint(vec![("char4", 4)]);
    let it = item();
    let lm = support::CharNgram::train(support::CORPUS, 4);
    let c = Candidates { yes: vec![" Yes".into(), " yes".into()], no: vec![" No".into()] };
    let a = HttpClient::new(&url, "char4", Api::Native).score(&it, &c).unwrap();
    let p = it.prompt.as_bytes();
    let expected_yes = logsumexp(&[lm.logp(p, b" Yes"), lm.logp(p, b" yes")]);
    assert!((a.logp_yes - expected_yes).abs() < 1e-12);
    assert!((a.logp_no - lm.logp(p, b" No")).abs() < 1e-12);
    let total: f64 = a.prompt_token_logps.iter().sum();
    assert!((total - lm.logp(b"", p)).abs() < 1e-9);

    let err = HttpClient::new(&url, "missing", Api::Native).with_retry(fast()).score(&it, &c).unwrap_err();
    assert!(matches!(err, EvalError::Http { status: 404, .. }));
}

async fn completions(State(hits): State<Arc<AtomicUsize>>, Json(req): Json<Value>) -> impl IntoResponse {
    if hits.fetch_add(1, Ordering::SeqCst) % 2 == 0 {
        return (StatusCode::SERVICE_UNAVAILABLE, Json(json!({"error": "busy"})));
    }
    assert_eq!(req["echo"], true);
    assert_eq!(req["max_tokens"], 0);
    let text = req["prompt"].as_str().unwrap();
    // One token per space-led word, costing -0.5 per byte; the first token has no logprob.
    let mut offsets: Vec<usize> = vec![0];
    offsets.extend(text.char_indices().filter(|(i, c)| *i > 0 && *c == ' ').map(|(i, _)| i));
    let ends = offsets.iter().skip(1).copied().chain([text.len()]);
    let lps: Vec<Value> = offsets
        .iter()
        .zip(ends)
        .enumerate()
        .map(|(k, (s, e))| if k == 0 { Value::Null } else { json!(-0.5 * (e - s) as f64) })
        .collect();
    (StatusCode::OK, Json(json!({"choices": [{"logprobs": {"token_logprobs": lps, "text_offset": offsets}}]})))
}

#[test]
fn openai_adapter_splits_echo_and_retries() {
    let hits = Arc::new(AtomicUsize::new(0));
    let base = support::spawn(Router::new().route("/v1/completions", post(completions)).with_state(hits.clone()));
    let it = item();
    let client = HttpClient::new(&format!("{base}/v1/completions"), "m", Api::OpenAi).with_retry(fast());
    let a = client.score(&it, &Candidates::default()).unwrap();
    assert_eq!(hits.load(Ordering::SeqCst), 4);
    assert_eq!(a.logp_yes, -2.0);
    assert_eq!(a.logp_no, -1.5);
    let words = it.prompt.split(' ').count();
    assert_eq!(a.prompt_token_logps.len(), words - 1);
}

#[test]
fn gives_up_after_retries() {
    let base = support::spawn(Router::new().route(
        "/",
        post(|| async { (StatusCode::SERVICE_UNAVAILABLE, "down") }),
    ));
    let err = HttpClient::new(&format!("{base}/"), "m", Api::Native)
        .with_retry(fast())
        .score(&item(), &Candidates::default())
        .unwrap_err();
    assert!(matches!(err, EvalError::Http { status: 503, .. }));

    let err = HttpClient::new("http://127.0.0.1:9/", "m", Api::Native)
        .with_retry(RetryPolicy { max_retries: 1, base_delay: Duration::from_millis(1) })
        .score(&item(), &Candidates::default())
        .unwrap_err();
    assert!(matches!(err, EvalError::Transport(_)));
}
