//! Scoring models on datasets and writing resumable result files.

mod cache;
mod client;

use std::collections::{HashMap, HashSet};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use modalsyl_core::analysis::Observation;
use modalsyl_core::metrics::{greedy_label, prompt_perplexity, soft_accuracy, AnswerLogprobs, MetricError};
use modalsyl_core::realize::QuestionItem;
use modalsyl_core::{ArgForm, Family, Label, LexiconKind, Modality};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cache::{cache_key, ScoreCache};
pub use client::{Api, HttpClient, OfflineClient, OracleMock, RetryPolicy, ScoringClient, UniformMock};

use crate::{jsonl, Error};

pub const API_KEY_ENV: &str = "MODALSYL_API_KEY";

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("endpoint returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("malformed endpoint response: {0}")]
    Protocol(String),
    #[error("candidate {0:?} scored no tokens")]
    EmptyCandidate(String),
    #[error("no {0} candidates configured")]
    NoCandidates(&'static str),
    #[error("offline file has no record for item {0}")]
    MissingOffline(String),
    #[error("{0}")]
    Metric(#[from] MetricError),
    #[error("{count} item(s) failed; see {}", path.display())]
    Failures { count: usize, path: PathBuf },
    #[error("{} holds results for model `{found}`, not `{expected}`", path.display())]
    ModelMismatch { path: PathBuf, found: String, expected: String },
}

/// Answer strings scored after the prompt. Variants of one answer are pooled
/// with log-sum-exp.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidates {
    pub yes: Vec<String>,
    pub no: Vec<String>,
}

impl Default for Candidates {
    fn default() -> Self {
        Candidates { yes: vec![" Yes".into()], no: vec![" No".into()] }
    }
}

impl Candidates {
    pub fn validate(&self) -> Result<(), EvalError> {
        for (side, list) in [("yes", &self.yes), ("no", &self.no)] {
            if list.is_empty() {
                return Err(EvalError::NoCandidates(side));
            }
            if let Some(c) = list.iter().find(|c| c.is_empty()) {
                return Err(EvalError::EmptyCandidate(c.clone()));
            }
        }
        Ok(())
    }
}

/// One scored item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub item_id: String,
    pub model: String,
    pub form_id: String,
    pub family: Family,
    pub modality: Modality,
    pub arg_form: ArgForm,
    pub ground_truth: Label,
    pub lexicon_kind: LexiconKind,
    pub answer: AnswerLogprobs,
    pub soft_score: f64,
    pub yes_share: f64,
    pub greedy_label: Label,
    pub perplexity: Option<f64>,
}

impl ModelResponse {
    pub fn build(item: &QuestionItem, model: &str, answer: AnswerLogprobs) -> Result<ModelResponse, MetricError> {
        let soft_score = soft_accuracy(&answer, item.ground_truth)?;
        let yes_share = soft_accuracy(&answer, Label::Yes)?;
        let perplexity = if answer.prompt_token_logps.is_empty() {
            None
        } else {
            Some(prompt_perplexity(&answer.prompt_token_logps)?)
        };
        Ok(ModelResponse {
            item_id: item.item_id.clone(),
            model: model.to_string(),
            form_id: item.form_id.clone(),
            family: item.family,
            modality: item.modality,
            arg_form: item.arg_form,
            ground_truth: item.ground_truth,
            lexicon_kind: item.lexicon_kind,
            greedy_label: greedy_label(&answer),
            answer,
            soft_score,
            yes_share,
            perplexity,
        })
    }

    pub fn observation(&self) -> Observation {
        Observation {
            model: self.model.clone(),
            item_id: self.item_id.clone(),
            form_id: self.form_id.clone(),
            family: self.family,
            modality: self.modality,
            arg_form: self.arg_form,
            valid: self.ground_truth.is_yes(),
            lexicon: self.lexicon_kind,
            soft_score: self.soft_score,
            yes_share: self.yes_share,
            perplexity: self.perplexity,
        }
    }
}

/// Trailing summary record of a results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub model: String,
    pub dataset: String,
    pub dataset_sha256: String,
    pub items: usize,
    pub acc_soft: f64,
    pub acc_greedy: f64,
    pub mean_perplexity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ResultRecord {
    Response(ModelResponse),
    Aggregate(Aggregate),
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Maximum number of requests in flight.
    pub concurrency: usize,
    pub candidates: Candidates,
    pub cache: Option<PathBuf>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { concurrency: 4, candidates: Candidates::default(), cache: None }
    }
}

#[derive(Serialize)]
struct Failure<'a> {
    item_id: &'a str,
    error: String,
}

pub fn failures_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".failures.json");
    PathBuf::from(s)
}

pub fn aggregate(responses: &[ModelResponse], model: &str, dataset: &str, sha256: &str) -> Aggregate {
    let n = responses.len() as f64;
    let ppl: Vec<f64> = responses.iter().filter_map(|r| r.perplexity).collect();
    Aggregate {
        model: model.to_string(),
        dataset: dataset.to_string(),
        dataset_sha256: sha256.to_string(),
        items: responses.len(),
        acc_soft: responses.iter().map(|r| r.soft_score).sum::<f64>() / n,
        acc_greedy: responses.iter().filter(|r| r.greedy_label == r.ground_truth).count() as f64 / n,
        mean_perplexity: (ppl.len() == responses.len() && !ppl.is_empty())
            .then(|| ppl.iter().sum::<f64>() / ppl.len() as f64),
    }
}

/// Response records already present in `out`. A truncated final line from an
/// interrupted run is dropped.
fn existing_responses(out: &Path) -> Result<Vec<ModelResponse>, Error> {
    let text = match std::fs::read_to_string(out) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(out, e)),
    };
    let lines: Vec<&str> = text.lines().collect();
    let mut found = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ResultRecord>(line) {
            Ok(ResultRecord::Response(r)) => found.push(r),
            Ok(ResultRecord::Aggregate(_)) => {}
            Err(_) if i + 1 == lines.len() && !text.ends_with('\n') => {}
            Err(e) => {
                return Err(Error::Parse { path: out.to_path_buf(), line: i + 1, message: e.to_string() })
            }
        }
    }
    Ok(found)
}

fn to_line(rec: &ResultRecord) -> Vec<u8> {
    let mut v = serde_json::to_vec(rec).expect("result record serializes");
    v.push(b'\n');
    v
}

/// Score every item of `dataset` with `client`, appending to `out` as results
/// arrive. Items already in `out` are skipped. On success `out` is rewritten in
/// item-id order followed by the aggregate record.
pub fn run_evaluation(
    dataset: &Path,
    client: &dyn ScoringClient,
    out: &Path,
    opts: &EvalOptions,
) -> Result<Aggregate, Error> {
    opts.candidates.validate()?;
    let bytes = std::fs::read(dataset).map_err(|e| Error::io(dataset, e))?;
    let sha = hex::encode(Sha256::digest(&bytes));
    let items: Vec<QuestionItem> = jsonl::read(dataset)?;
    let model = client.model().to_string();

    let ids: HashSet<&str> = items.iter().map(|i| i.item_id.as_str()).collect();
    let mut done: HashMap<String, ModelResponse> = HashMap::new();
    for r in existing_responses(out)? {
        if r.model != model {
            return Err(EvalError::ModelMismatch { path: out.to_path_buf(), found: r.model, expected: model }.into());
        }
        if ids.contains(r.item_id.as_str()) {
            done.insert(r.item_id.clone(), r);
        }
    }
    let mut kept: Vec<&ModelResponse> = done.values().collect();
    kept.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    let prefix: Vec<u8> = kept.iter().flat_map(|r| to_line(&ResultRecord::Response((*r).clone()))).collect();
    jsonl::write_atomic(out, &prefix)?;

    let pending: Vec<&QuestionItem> = items.iter().filter(|i| !done.contains_key(&i.item_id)).collect();
    let cache = opts.cache.as_deref().map(ScoreCache::open).transpose()?;
    let mut file = OpenOptions::new().append(true).open(out).map_err(|e| Error::io(out, e))?;
    let mut failures: Vec<(String, String)> = Vec::new();

    let next = AtomicUsize::new(0);
    let workers = opts.concurrency.max(1).min(pending.len().max(1));
    let write_result = std::thread::scope(|s| -> Result<(), Error> {
        let (tx, rx) = mpsc::channel::<Result<ModelResponse, (String, String)>>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, pending, cache, model) = (&next, &pending, &cache, &model);
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = pending.get(i) else { break };
                let res = score_item(client, cache.as_ref(), item, model, &opts.candidates)
                    .map_err(|e| (item.item_id.clone(), e.to_string()));
                if tx.send(res).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for res in rx {
            match res {
                Ok(r) => {
                    file.write_all(&to_line(&ResultRecord::Response(r.clone()))).map_err(|e| Error::io(out, e))?;
                    done.insert(r.item_id.clone(), r);
                }
                Err(f) => failures.push(f),
            }
        }
        file.sync_all().map_err(|e| Error::io(out, e))
    });
    write_result?;

    if !failures.is_empty() {
        failures.sort();
        let report: Vec<Failure> = failures.iter().map(|(id, e)| Failure { item_id: id, error: e.clone() }).collect();
        let path = failures_path(out);
        let text = serde_json::to_string_pretty(&report).expect("failures serialize");
        jsonl::write_atomic(&path, text.as_bytes())?;
        return Err(EvalError::Failures { count: failures.len(), path }.into());
    }

    let mut responses: Vec<ModelResponse> = done.into_values().collect();
    responses.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    let name = dataset.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let agg = aggregate(&responses, &model, &name, &sha);
    let mut buf = Vec::new();
    for r in responses {
        buf.extend(to_line(&ResultRecord::Response(r)));
    }
    buf.extend(to_line(&ResultRecord::Aggregate(agg.clone())));
    jsonl::write_atomic(out, &buf)?;
    Ok(agg)
}

fn score_item(
    client: &dyn ScoringClient,
    cache: Option<&ScoreCache>,
    item: &QuestionItem,
    model: &str,
    candidates: &Candidates,
) -> Result<ModelResponse, Error> {
    let key = cache.map(|_| cache_key(model, &item.prompt, candidates));
    let cached = cache.zip(key.as_deref()).and_then(|(c, k)| c.get(k));
    let answer = match cached {
        Some(a) => a,
        None => {
            let a = client.score(item, candidates)?;
            if let (Some(c), Some(k)) = (cache, key) {
                c.put(k, &a)?;
            }
            a
        }
    };
    Ok(ModelResponse::build(item, model, answer).map_err(EvalError::from)?)
}

/// Responses and aggregates from one or more results files.
pub fn read_results(paths: &[PathBuf]) -> Result<(Vec<ModelResponse>, Vec<Aggregate>), Error> {
    let mut responses = Vec::new();
    let mut aggregates = Vec::new();
    for p in paths {
        for rec in jsonl::read::<ResultRecord>(p)? {
            match rec {
                ResultRecord::Response(r) => responses.push(r),
                ResultRecord::Aggregate(a) => aggregates.push(a),
            }
        }
    }
    Ok((responses, aggregates))
}
