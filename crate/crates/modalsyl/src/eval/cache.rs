//! Append-only score cache keyed by a hash of (model, prompt, candidates).

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use modalsyl_core::metrics::AnswerLogprobs;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Candidates;
use crate::Error;

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    answer: AnswerLogprobs,
}

pub fn cache_key(model: &str, prompt: &str, candidates: &Candidates) -> String {
    let mut h = Sha256::new();
    for part in [model, prompt] {
        h.update(part.as_bytes());
        h.update([0]);
    }
    for c in &candidates.yes {
        h.update(c.as_bytes());
        h.update([1]);
    }
    h.update([2]);
    for c in &candidates.no {
        h.update(c.as_bytes());
        h.update([1]);
    }
    hex::encode(h.finalize())
}

pub struct ScoreCache {
    path: PathBuf,
    entries: Mutex<HashMap<String, AnswerLogprobs>>,
    file: Mutex<File>,
}

impl ScoreCache {
    /// Open or create a cache file. A truncated trailing line is ignored.
    pub fn open(path: &Path) -> Result<ScoreCache, Error> {
        let mut entries = HashMap::new();
        if path.exists() {
            let f = File::open(path).map_err(|e| Error::io(path, e))?;
            for line in BufReader::new(f).lines() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if let Ok(e) = serde_json::from_str::<Entry>(&line) {
                    entries.insert(e.key, e.answer);
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(ScoreCache { path: path.to_path_buf(), entries: Mutex::new(entries), file: Mutex::new(file) })
    }

    pub fn get(&self, key: &str) -> Option<AnswerLogprobs> {
        self.entries.lock().unwrap().get(key).cloned()
    }

    pub fn put(&self, key: String, answer: &AnswerLogprobs) -> Result<(), Error> {
        let mut line = serde_json::to_vec(&Entry { key: key.clone(), answer: answer.clone() })
            .expect("cache entry serializes");
        line.push(b'\n');
        self.file.lock().unwrap().write_all(&line).map_err(|e| Error::io(&self.path, e))?;
        self.entries.lock().unwrap().insert(key, answer.clone());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
