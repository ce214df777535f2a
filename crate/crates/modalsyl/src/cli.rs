//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use clap::{Parser, Subcommand, ValueEnum};
use modalsyl_core::catalog::{audit, builtin_catalog};
use modalsyl_core::realize::QuestionItem;
use modalsyl_core::{decide_with, FrameClass, LexiconKind, Mode, ProverConfig, Sequent};

use crate::dataset::{self, GenerateConfig, DEFAULT_SEED};
use crate::eval::{
    self, Api, Candidates, EvalOptions, HttpClient, OfflineClient, OracleMock, RetryPolicy, ScoringClient,
    UniformMock, API_KEY_ENV,
};
use crate::study::{self, Store, StudyConfig, TrialRecord};
use crate::{jsonl, lexicon, report, Error};

#[derive(Parser, Debug)]
#[command(name = "modalsyl", version, about = "Modal syllogism datasets, prover, LLM scoring and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MockKind {
    Uniform,
    Oracle,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit a question dataset as JSONL.
    Generate {
        /// Comma-separated families: main24, necessitation, distribution.
        #[arg(long, default_value = "main24")]
        families: String,
        /// Interpretations per form.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// `natural`, `nonsense`, or a path to a lexicon JSON file.
        #[arg(long, default_value = "natural")]
        lexicon: String,
        /// Output file; stdout when omitted. A `.meta.json` sidecar is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide a single sequent such as `p|q; ~p |- q`.
    Prove {
        sequent: String,
        #[arg(long, default_value = "local")]
        mode: Mode,
        /// Frame class: k or t.
        #[arg(long, default_value = "t")]
        frames: FrameClass,
        #[arg(long, default_value_t = 200_000)]
        max_nodes: usize,
        /// Print the verdict as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Compare prover labels with the published labels for every catalog form.
    AuditCatalog {
        /// Print rows as JSON lines.
        #[arg(long)]
        json: bool,
    },
    /// Score a dataset with a model and write a results file.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Scoring endpoint URL.
        #[arg(long, conflicts_with_all = ["offline", "mock"])]
        endpoint: Option<String>,
        /// JSONL of stored log-probabilities keyed by item id.
        #[arg(long, conflicts_with = "mock")]
        offline: Option<PathBuf>,
        #[arg(long)]
        mock: Option<MockKind>,
        /// Model identifier sent to the endpoint and recorded in results.
        #[arg(long, default_value = "model")]
        model: String,
        /// Endpoint protocol: native or openai.
        #[arg(long, default_value = "native")]
        api: Api,
        /// Requests in flight.
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        /// Score cache file.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Affirmative answer strings (repeatable).
        #[arg(long = "yes", default_values_t = [" Yes".to_string()])]
        yes: Vec<String>,
        /// Negative answer strings (repeatable).
        #[arg(long = "no", default_values_t = [" No".to_string()])]
        no: Vec<String>,
        #[arg(long, default_value_t = 4)]
        max_retries: u32,
        /// Score a form-balanced subsample of this many items.
        #[arg(long)]
        subsample: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Write CSV reports from results files and optional human trials.
    Analyze {
        /// Results JSONL from `eval` (repeatable).
        #[arg(long = "results", required = true)]
        results: Vec<PathBuf>,
        /// Trial JSONL exported from the study service.
        #[arg(long)]
        human: Option<PathBuf>,
        #[arg(long, default_value = "report")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Run the human-study HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Append-only trial log.
        #[arg(long, default_value = "study_log.jsonl")]
        log: PathBuf,
        /// Item pool; a fresh main24 pool is generated when omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Interpretations per form for the generated pool.
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 24)]
        items_per_session: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Directory of static UI files served at `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}").map_err(|e| Error::io("<stdout>", e))?;
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(Error::Usage(first.trim_start_matches("error: ").to_string()));
        }
    };
    execute(cli.command, out)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Error> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

pub fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), Error> {
    match cmd {
        Command::Generate { families, n, seed, lexicon, out: path } => {
            let cfg = GenerateConfig {
                families: dataset::parse_families(&families)?,
                n,
                seed,
                lexicon: lexicon::resolve(&lexicon)?,
            };
            let items = dataset::generate(&cfg)?;
            match path {
                Some(p) => {
                    let meta = dataset::write(&p, &cfg, &items)?;
                    eprintln!("wrote {} items ({} Yes) to {} (seed {seed})", meta.items, meta.yes, p.display());
                }
                None => {
                    out.write_all(&dataset::to_jsonl(&items)).map_err(|e| Error::io("<stdout>", e))?;
                    eprintln!("seed {seed}; no sidecar written for stdout output");
                }
            }
            Ok(())
        }
        Command::Prove { sequent, mode, frames, max_nodes, json } => {
            let s = Sequent::parse(&sequent)?.with_mode(mode).with_frames(frames);
            let v = decide_with(&s, ProverConfig { max_nodes })?;
            if json {
                emit(out, &format!("{}\n", serde_json::to_string(&v).expect("verdict serializes")))
            } else if v.valid {
                emit(out, "valid\n")
            } else {
                let model = v.countermodel.expect("invalid verdicts carry a countermodel");
                emit(out, &format!("invalid\ncountermodel:\n{model}"))
            }
        }
        Command::AuditCatalog { json } => audit_catalog(json, out),
        Command::Eval {
            dataset: data,
            out: results,
            endpoint,
            offline,
            mock,
            model,
            api,
            concurrency,
            cache,
            yes,
            no,
            max_retries,
            subsample,
            seed,
        } => {
            let client: Box<dyn ScoringClient> = match (endpoint, offline, mock) {
                (Some(url), _, _) => Box::new(
                    HttpClient::new(&url, &model, api)
                        .with_api_key(std::env::var(API_KEY_ENV).ok())
                        .with_retry(RetryPolicy { max_retries, ..RetryPolicy::default() }),
                ),
                (None, Some(p), _) => Box::new(OfflineClient::load(&p, &model)?),
                (None, None, Some(MockKind::Uniform)) => Box::new(UniformMock),
                (None, None, Some(MockKind::Oracle)) => Box::new(OracleMock),
                (None, None, None) => {
                    return Err(Error::Usage("one of --endpoint, --offline or --mock is required".into()))
                }
            };
            let data = match subsample {
                Some(k) => subsample_file(&data, &results, k, seed)?,
                None => data,
            };
            let opts = EvalOptions { concurrency, candidates: Candidates { yes, no }, cache };
            let agg = eval::run_evaluation(&data, client.as_ref(), &results, &opts)?;
            emit(
                out,
                &format!(
                    "model {} items {} acc_soft {:.6} acc_greedy {:.6} mean_perplexity {}\n",
                    agg.model,
                    agg.items,
                    agg.acc_soft,
                    agg.acc_greedy,
                    agg.mean_perplexity.map(|p| format!("{p:.4}")).unwrap_or_else(|| "n/a".into())
                ),
            )
        }
        Command::Analyze { results, human, out_dir, seed } => {
            let (responses, _) = eval::read_results(&results)?;
            let obs: Vec<_> = responses.iter().map(|r| r.observation()).collect();
            let mut sheets = report::model_sheets(&obs)?;
            if let Some(h) = human {
                let trials: Vec<TrialRecord> = jsonl::read(&h)?;
                let hobs: Vec<_> = trials.iter().map(TrialRecord::observation).collect();
                sheets.extend(report::human_sheets(&hobs)?);
            }
            for p in report::write_sheets(&out_dir, &sheets, seed)? {
                emit(out, &format!("{}\n", p.display()))?;
            }
            Ok(())
        }
        Command::Serve { host, port, log, dataset: data, n, items_per_session, seed, static_dir } => {
            let pool: Vec<QuestionItem> = match data {
                Some(p) => dataset::read(&p)?,
                None => dataset::generate(&GenerateConfig {
                    families: vec![modalsyl_core::Family::Main24],
                    n,
                    seed,
                    lexicon: lexicon::builtin(LexiconKind::Natural),
                })?,
            };
            let store = Store::open(&log, pool, StudyConfig { items_per_session, seed })?;
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| Error::Usage(format!("bad address {host}:{port}: {e}")))?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("<runtime>", e))?;
            rt.block_on(study::serve(addr, Arc::new(Mutex::new(store)), static_dir))
                .map_err(|e| Error::io(addr.to_string(), e))
        }
    }
}

fn subsample_file(data: &Path, results: &Path, k: usize, seed: u64) -> Result<PathBuf, Error> {
    let items = dataset::read(data)?;
    let picked = dataset::subsample(&items, k, seed);
    let mut p = results.as_os_str().to_owned();
    p.push(".dataset.jsonl");
    let p = PathBuf::from(p);
    jsonl::write_atomic(&p, &dataset::to_jsonl(&picked))?;
    Ok(p)
}

fn audit_catalog(json: bool, out: &mut dyn Write) -> Result<(), Error> {
    let rows = audit(&builtin_catalog())?;
    let matches = rows.iter().filter(|r| r.matches).count();
    let documented: Vec<&str> = rows.iter().filter(|r| r.is_documented_divergence()).map(|r| r.id.as_str()).collect();
    let mut text = String::new();
    for r in &rows {
        if json {
            text.push_str(&serde_json::to_string(r).expect("audit row serializes"));
            text.push('\n');
        } else {
            let status = if r.matches {
                "match"
            } else if r.is_documented_divergence() {
                "DIVERGENCE"
            } else {
                "MISMATCH"
            };
            text.push_str(&format!(
                "{:<40} {:<6} {:<2} prover={:<3} oracle={:<3} published={:<3} {status}  {}\n",
                r.id,
                r.mode.tag(),
                r.frames.tag(),
                r.prover.as_str(),
                r.oracle.as_str(),
                r.published.as_str(),
                r.sequent
            ));
        }
    }
    if !json {
        text.push_str(&format!(
            "{} entries: {matches} match, {} documented divergence(s){}\n",
            rows.len(),
            documented.len(),
            if documented.is_empty() { String::new() } else { format!(" ({})", documented.join(", ")) }
        ));
    }
    emit(out, &text)?;
    let unexplained = rows.len() - matches - documented.len();
    if unexplained > 0 {
        return Err(Error::Usage(format!("{unexplained} catalog entries disagree with their published label")));
    }
    Ok(())
}
