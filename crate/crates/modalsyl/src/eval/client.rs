//! Scoring clients: offline files, mocks and HTTP endpoints.

use std::collections::HashMap;
use std::path::Path;
use std::thread;
use std::time::Duration;

use modalsyl_core::metrics::{logsumexp, AnswerLogprobs};
use modalsyl_core::realize::QuestionItem;
use modalsyl_core::Label;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Candidates, EvalError};
use crate::{jsonl, Error};

/// Anything that can return answer log-probabilities for a question.
pub trait ScoringClient: Sync {
    fn model(&self) -> &str;
    fn score(&self, item: &QuestionItem, candidates: &Candidates) -> Result<AnswerLogprobs, EvalError>;
}

#[derive(Deserialize)]
struct OfflineRecord {
    item_id: String,
    #[serde(flatten)]
    answer: AnswerLogprobs,
}

/// Replays stored log-probabilities by item id.
pub struct OfflineClient {
    model: String,
    records: HashMap<String, AnswerLogprobs>,
}

impl OfflineClient {
    pub fn load(path: &Path, model: &str) -> Result<OfflineClient, Error> {
        let records: Vec<OfflineRecord> = jsonl::read(path)?;
        Ok(OfflineClient {
            model: model.to_string(),
            records: records.into_iter().map(|r| (r.item_id, r.answer)).collect(),
        })
    }
}

impl ScoringClient for OfflineClient {
    fn model(&self) -> &str {
        &self.model
    }

    fn score(&self, item: &QuestionItem, _: &Candidates) -> Result<AnswerLogprobs, EvalError> {
        self.records
            .get(&item.item_id)
            .cloned()
            .ok_or_else(|| EvalError::MissingOffline(item.item_id.clone()))
    }
}

fn word_logps(prompt: &str) -> Vec<f64> {
    vec![-core::f64::consts::LN_2; prompt.split_whitespace().count().max(1)]
}

/// Assigns equal probability to both answers.
pub struct UniformMock;

impl ScoringClient for UniformMock {
    fn model(&self) -> &str {
        "mock-uniform"
    }

    fn score(&self, item: &QuestionItem, _: &Candidates) -> Result<AnswerLogprobs, EvalError> {
        let half = 0.5f64.ln();
        Ok(AnswerLogprobs::new(half, half).with_prompt(word_logps(&item.prompt)))
    }
}

/// Reads the ground truth: log-probability 0 for the right answer, -10 for the other.
pub struct OracleMock;

impl ScoringClient for OracleMock {
    fn model(&self) -> &str {
        "mock-oracle"
    }

    fn score(&self, item: &QuestionItem, _: &Candidates) -> Result<AnswerLogprobs, EvalError> {
        let (y, n) = match item.ground_truth {
            Label::Yes => (0.0, -10.0),
            Label::No => (-10.0, 0.0),
        };
        Ok(AnswerLogprobs::new(y, n).with_prompt(word_logps(&item.prompt)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Api {
    /// `{model, prompt, candidates, echo_prompt}` → `{candidate_logprobs, prompt_token_logprobs?}`.
    Native,
    /// Legacy completions API with `echo` and `logprobs`.
    OpenAi,
}

impl std::str::FromStr for Api {
    type Err = String;

    fn from_str(s: &str) -> Result<Api, String> {
        match s {
            "native" => Ok(Api::Native),
            "openai" => Ok(Api::OpenAi),
            _ => Err(format!("unknown api `{s}` (expected native or openai)")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 4, base_delay: Duration::from_millis(250) }
    }
}

pub struct HttpClient {
    url: String,
    model: String,
    api: Api,
    api_key: Option<String>,
    retry: RetryPolicy,
    http: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct NativeRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    candidates: Vec<&'a str>,
    echo_prompt: bool,
}

#[derive(Deserialize)]
struct NativeResponse {
    candidate_logprobs: Vec<f64>,
    #[serde(default)]
    prompt_token_logprobs: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

#[derive(Deserialize)]
struct CompletionChoice {
    logprobs: CompletionLogprobs,
}

#[derive(Deserialize)]
struct CompletionLogprobs {
    token_logprobs: Vec<Option<f64>>,
    text_offset: Vec<usize>,
}

enum Attempt {
    Retry(EvalError),
    Fail(EvalError),
}

impl HttpClient {
    pub fn new(url: &str, model: &str, api: Api) -> HttpClient {
        HttpClient {
            url: url.to_string(),
            model: model.to_string(),
            api,
            api_key: None,
            retry: RetryPolicy::default(),
            http: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(120))
                .build()
                .expect("HTTP client builds"),
        }
    }

    pub fn with_api_key(mut self, key: Option<String>) -> Self {
        self.api_key = key;
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    fn post(&self, body: &serde_json::Value) -> Result<serde_json::Value, EvalError> {
        let mut attempt = 0;
        loop {
            match self.post_once(body) {
                Ok(v) => return Ok(v),
                Err(Attempt::Fail(e)) => return Err(e),
                Err(Attempt::Retry(e)) if attempt >= self.retry.max_retries => return Err(e),
                Err(Attempt::Retry(_)) => {
                    thread::sleep(self.retry.base_delay * 2u32.pow(attempt));
                    attempt += 1;
                }
            }
        }
    }

    fn post_once(&self, body: &serde_json::Value) -> Result<serde_json::Value, Attempt> {
        let mut req = self.http.post(&self.url).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Attempt::Retry(EvalError::Transport(e.to_string())))?;
        let status = resp.status();
        if !status.is_success() {
            let err = EvalError::Http { status: status.as_u16(), body: resp.text().unwrap_or_default() };
            return Err(if status.is_server_error() || status.as_u16() == 429 {
                Attempt::Retry(err)
            } else {
                Attempt::Fail(err)
            });
        }
        resp.json().map_err(|e| Attempt::Fail(EvalError::Protocol(e.to_string())))
    }

    fn score_native(&self, prompt: &str, c: &Candidates) -> Result<(Vec<f64>, Vec<f64>), EvalError> {
        let req = NativeRequest {
            model: &self.model,
            prompt,
            candidates: c.yes.iter().chain(&c.no).map(String::as_str).collect(),
            echo_prompt: true,
        };
        let v = self.post(&serde_json::to_value(req).expect("request serializes"))?;
        let r: NativeResponse = serde_json::from_value(v).map_err(|e| EvalError::Protocol(e.to_string()))?;
        if r.candidate_logprobs.len() != c.yes.len() + c.no.len() {
            return Err(EvalError::Protocol(format!(
                "expected {} candidate logprobs, got {}",
                c.yes.len() + c.no.len(),
                r.candidate_logprobs.len()
            )));
        }
        Ok((r.candidate_logprobs, r.prompt_token_logprobs.unwrap_or_default()))
    }

    /// Score `prompt + candidate` with echo; tokens at or after the prompt's
    /// end belong to the candidate.
    fn score_completion(&self, prompt: &str, candidate: &str) -> Result<(f64, Vec<f64>), EvalError> {
        let body = json!({
            "model": self.model,
            "prompt": format!("{prompt}{candidate}"),
            "max_tokens": 0,
            "echo": true,
            "logprobs": 0,
            "temperature": 0,
        });
        let v = self.post(&body)?;
        let r: CompletionResponse = serde_json::from_value(v).map_err(|e| EvalError::Protocol(e.to_string()))?;
        let lp = &r
            .choices
            .first()
            .ok_or_else(|| EvalError::Protocol("no choices".into()))?
            .logprobs;
        if lp.token_logprobs.len() != lp.text_offset.len() {
            return Err(EvalError::Protocol("token_logprobs and text_offset differ in length".into()));
        }
        let boundary = prompt.chars().count();
        let mut cand = None;
        let mut prompt_lps = Vec::new();
        for (lp, &off) in lp.token_logprobs.iter().zip(&lp.text_offset) {
            match (lp, off >= boundary) {
                (Some(x), true) => *cand.get_or_insert(0.0) += x,
                (Some(x), false) => prompt_lps.push(*x),
                (None, true) => return Err(EvalError::Protocol("candidate token without logprob".into())),
                (None, false) => {}
            }
        }
        let cand = cand.ok_or_else(|| EvalError::EmptyCandidate(candidate.to_string()))?;
        Ok((cand, prompt_lps))
    }
}

fn check_logp(x: f64) -> Result<f64, EvalError> {
    if x.is_nan() || x > 1e-6 {
        return Err(EvalError::Protocol(format!("invalid log-probability {x}")));
    }
    Ok(x.min(0.0))
}

impl ScoringClient for HttpClient {
    fn model(&self) -> &str {
        &self.model
    }

    fn score(&self, item: &QuestionItem, c: &Candidates) -> Result<AnswerLogprobs, EvalError> {
        let (cand, prompt_lps) = match self.api {
            Api::Native => self.score_native(&item.prompt, c)?,
            Api::OpenAi => {
                let mut cand = Vec::new();
                let mut prompt_lps = Vec::new();
                for (i, text) in c.yes.iter().chain(&c.no).enumerate() {
                    let (x, p) = self.score_completion(&item.prompt, text)?;
                    cand.push(x);
                    if i == 0 {
                        prompt_lps = p;
                    }
                }
                (cand, prompt_lps)
            }
        };
        let cand = cand.into_iter().map(check_logp).collect::<Result<Vec<_>, _>>()?;
        let prompt_lps = prompt_lps.into_iter().map(check_logp).collect::<Result<Vec<_>, _>>()?;
        let (yes, no) = cand.split_at(c.yes.len());
        Ok(AnswerLogprobs::new(logsumexp(yes), logsumexp(no)).with_prompt(prompt_lps))
    }
}
