//! Dataset generation and JSONL storage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use modalsyl_core::catalog::catalog_families;
use modalsyl_core::lexicon::sample_interpretations;
use modalsyl_core::realize::{realize_dataset, QuestionItem};
use modalsyl_core::{Family, Label, Lexicon, LexiconKind};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{jsonl, Error};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug)]
pub struct GenerateConfig {
    pub families: Vec<Family>,
    /// Interpretations per form.
    pub n: usize,
    pub seed: u64,
    pub lexicon: Lexicon,
}

/// Provenance written next to a dataset as `<file>.meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    pub n_per_form: usize,
    pub families: Vec<Family>,
    pub lexicon: LexiconKind,
    pub items: usize,
    pub yes: usize,
    pub no: usize,
    pub sha256: String,
}

/// Every catalog form of the chosen families under the same `n` sampled
/// interpretations, form-major in catalog order.
pub fn generate(cfg: &GenerateConfig) -> Result<Vec<QuestionItem>, Error> {
    cfg.lexicon.validate()?;
    let entries = catalog_families(&cfg.families);
    let interps = sample_interpretations(&cfg.lexicon, cfg.n, cfg.seed)?;
    Ok(realize_dataset(&entries, &interps, cfg.lexicon.kind)?)
}

pub fn to_jsonl(items: &[QuestionItem]) -> Vec<u8> {
    let mut buf = Vec::new();
    jsonl::write_to(&mut buf, items).expect("writing to memory");
    buf
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn describe(cfg: &GenerateConfig, items: &[QuestionItem], bytes: &[u8]) -> DatasetMeta {
    let yes = items.iter().filter(|i| i.ground_truth == Label::Yes).count();
    DatasetMeta {
        seed: cfg.seed,
        n_per_form: cfg.n,
        families: cfg.families.clone(),
        lexicon: cfg.lexicon.kind,
        items: items.len(),
        yes,
        no: items.len() - yes,
        sha256: hex::encode(Sha256::digest(bytes)),
    }
}

/// Write the JSONL file and its metadata sidecar.
pub fn write(path: &Path, cfg: &GenerateConfig, items: &[QuestionItem]) -> Result<DatasetMeta, Error> {
    let bytes = to_jsonl(items);
    let meta = describe(cfg, items, &bytes);
    jsonl::write_atomic(path, &bytes)?;
    let sidecar = meta_path(path);
    let text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    jsonl::write_atomic(&sidecar, text.as_bytes())?;
    Ok(meta)
}

pub fn read(path: &Path) -> Result<Vec<QuestionItem>, Error> {
    jsonl::read(path)
}

pub fn parse_families(spec: &str) -> Result<Vec<Family>, Error> {
    let mut out = Vec::new();
    for tag in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let f = Family::from_tag(tag).ok_or_else(|| {
            Error::Usage(format!("unknown family `{tag}` (expected main24, necessitation, distribution)"))
        })?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err(Error::Usage("no families given".into()));
    }
    Ok(out)
}

/// Deterministic subsample of `n` items spread evenly over forms, returned in
/// the original order.
pub fn subsample(items: &[QuestionItem], n: usize, seed: u64) -> Vec<QuestionItem> {
    if n >= items.len() {
        return items.to_vec();
    }
    let mut by_form: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        by_form.entry(&item.form_id).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pools: Vec<Vec<usize>> = by_form.into_values().collect();
    for pool in &mut pools {
        pool.shuffle(&mut rng);
    }
    let mut picked = Vec::with_capacity(n);
    let mut round = 0;
    while picked.len() < n {
        for pool in &pools {
            if picked.len() < n && round < pool.len() {
                picked.push(pool[round]);
            }
        }
        round += 1;
    }
    picked.sort_unstable();
    picked.into_iter().map(|i| items[i].clone()).collect()
}
