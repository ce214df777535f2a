//! Session store backed by an append-only JSONL log.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use modalsyl_core::analysis::HumanObservation;
use modalsyl_core::realize::{prompt_parts, QuestionItem};
use modalsyl_core::{ArgForm, Family, Label, Modality};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StudyError;

pub const INSTRUCTIONS_F_YES: &str = "In this study, you will be presented with two statements followed by a question. Your task is to answer either Yes or No to the question, based on the information provided in the statements. Please respond quickly and accurately by pressing \"F\" for Yes, and \"J\" for No.";
pub const INSTRUCTIONS_F_NO: &str = "In this study, you will be presented with two statements followed by a question. Your task is to answer either Yes or No to the question, based on the information provided in the statements. Please respond quickly and accurately by pressing \"F\" for No, and \"J\" for Yes.";

/// Accepted reaction times, exclusive bounds in milliseconds.
pub const RT_BOUNDS_MS: (f64, f64) = (50.0, 600_000.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeyMapping {
    /// F = Yes, J = No.
    FYes,
    /// F = No, J = Yes.
    FNo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Key {
    F,
    J,
}

impl std::str::FromStr for Key {
    type Err = StudyError;

    fn from_str(s: &str) -> Result<Key, StudyError> {
        match s {
            "F" | "f" => Ok(Key::F),
            "J" | "j" => Ok(Key::J),
            _ => Err(StudyError::InvalidKey(s.to_string())),
        }
    }
}

impl KeyMapping {
    pub fn decode(self, key: Key) -> Label {
        match (self, key) {
            (KeyMapping::FYes, Key::F) | (KeyMapping::FNo, Key::J) => Label::Yes,
            _ => Label::No,
        }
    }

    pub fn instructions(self) -> &'static str {
        match self {
            KeyMapping::FYes => INSTRUCTIONS_F_YES,
            KeyMapping::FNo => INSTRUCTIONS_F_NO,
        }
    }

    pub fn legend(self) -> &'static str {
        match self {
            KeyMapping::FYes => "F = Yes    J = No",
            KeyMapping::FNo => "F = No    J = Yes",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub key_mapping: KeyMapping,
    pub items: Vec<String>,
    pub created_at: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub session_id: String,
    pub item_id: String,
    pub order_index: usize,
    pub key_mapping: KeyMapping,
    pub key_pressed: Key,
    pub response: Label,
    pub rt_ms: f64,
    pub correct: bool,
    pub form_id: String,
    pub family: Family,
    pub modality: Modality,
    pub arg_form: ArgForm,
    pub ground_truth: Label,
}

impl TrialRecord {
    pub fn observation(&self) -> HumanObservation {
        HumanObservation {
            participant: self.session_id.clone(),
            item_id: self.item_id.clone(),
            form_id: self.form_id.clone(),
            family: self.family,
            modality: self.modality,
            arg_form: self.arg_form,
            valid: self.ground_truth.is_yes(),
            correct: self.correct,
            rt_ms: self.rt_ms,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum LogRecord {
    Session(Session),
    Trial(TrialRecord),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trial {
    pub item_id: String,
    pub index: usize,
    pub total: usize,
    pub statements: Vec<String>,
    pub question: String,
    pub legend: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Next {
    Trial(Trial),
    Done { total: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct StudyConfig {
    pub items_per_session: usize,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig { items_per_session: 24, seed: 42 }
    }
}

struct SessionState {
    session: Session,
    cursor: usize,
}

pub struct Store {
    config: StudyConfig,
    items: HashMap<String, QuestionItem>,
    forms: Vec<Vec<String>>,
    sessions: HashMap<String, SessionState>,
    trials: Vec<TrialRecord>,
    created: usize,
    mapping_counts: [usize; 2],
    log: File,
    log_path: PathBuf,
}

impl Store {
    /// Open the log at `path`, replaying any sessions and trials it holds.
    pub fn open(path: &Path, pool: Vec<QuestionItem>, config: StudyConfig) -> Result<Store, StudyError> {
        if pool.is_empty() {
            return Err(StudyError::NoItems);
        }
        let mut by_form: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for item in &pool {
            by_form.entry(item.form_id.clone()).or_default().push(item.item_id.clone());
        }
        let io = |e: std::io::Error| StudyError::Io(format!("{}: {e}", path.display()));
        let mut store = Store {
            config,
            items: pool.into_iter().map(|i| (i.item_id.clone(), i)).collect(),
            forms: by_form.into_values().collect(),
            sessions: HashMap::new(),
            trials: Vec::new(),
            created: 0,
            mapping_counts: [0, 0],
            log: OpenOptions::new().create(true).append(true).open(path).map_err(io)?,
            log_path: path.to_path_buf(),
        };
        let reader = BufReader::new(File::open(path).map_err(io)?);
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: LogRecord = serde_json::from_str(&line)
                .map_err(|e| StudyError::Io(format!("{}:{}: {e}", path.display(), n + 1)))?;
            match rec {
                LogRecord::Session(s) => store.install(s),
                LogRecord::Trial(t) => {
                    let st = store
                        .sessions
                        .get_mut(&t.session_id)
                        .ok_or_else(|| StudyError::UnknownSession(t.session_id.clone()))?;
                    st.cursor += 1;
                    store.trials.push(t);
                }
            }
        }
        Ok(store)
    }

    fn install(&mut self, s: Session) {
        self.created += 1;
        self.mapping_counts[s.key_mapping as usize] += 1;
        self.sessions.insert(s.session_id.clone(), SessionState { session: s, cursor: 0 });
    }

    fn append(&mut self, rec: &LogRecord) -> Result<(), StudyError> {
        let mut line = serde_json::to_vec(rec).expect("log record serializes");
        line.push(b'\n');
        self.log
            .write_all(&line)
            .and_then(|_| self.log.sync_data())
            .map_err(|e| StudyError::Io(format!("{}: {e}", self.log_path.display())))
    }

    /// Items drawn round-robin over forms, then shuffled.
    fn assign(&self, index: usize) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index as u64);
        let mut form_order: Vec<usize> = (0..self.forms.len()).collect();
        form_order.shuffle(&mut rng);
        let mut out: Vec<String> = (0..self.config.items_per_session)
            .map(|k| {
                let pool = &self.forms[form_order[k % form_order.len()]];
                pool[rng.gen_range(0..pool.len())].clone()
            })
            .collect();
        out.shuffle(&mut rng);
        out
    }

    pub fn create_session(&mut self) -> Result<Session, StudyError> {
        let key_mapping = if self.created.is_multiple_of(2) { KeyMapping::FYes } else { KeyMapping::FNo };
        let session = Session {
            session_id: format!("{:032x}", rand::thread_rng().gen::<u128>()),
            key_mapping,
            items: self.assign(self.created),
            created_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0),
        };
        self.append(&LogRecord::Session(session.clone()))?;
        self.install(session.clone());
        Ok(session)
    }

    fn state(&self, id: &str) -> Result<&SessionState, StudyError> {
        self.sessions.get(id).ok_or_else(|| StudyError::UnknownSession(id.to_string()))
    }

    pub fn next_trial(&self, id: &str) -> Result<Next, StudyError> {
        let st = self.state(id)?;
        let total = st.session.items.len();
        let Some(item_id) = st.session.items.get(st.cursor) else {
            return Ok(Next::Done { total });
        };
        let item = &self.items[item_id];
        let (statements, question) =
            prompt_parts(&item.prompt).ok_or_else(|| StudyError::Io(format!("malformed prompt for {item_id}")))?;
        Ok(Next::Trial(Trial {
            item_id: item_id.clone(),
            index: st.cursor,
            total,
            statements: statements.into_iter().map(String::from).collect(),
            question: question.to_string(),
            legend: st.session.key_mapping.legend().to_string(),
        }))
    }

    pub fn submit(&mut self, id: &str, item_id: &str, key: &str, rt_ms: f64) -> Result<TrialRecord, StudyError> {
        let st = self.state(id)?;
        let cursor = st.cursor;
        let expected = match st.session.items.get(cursor) {
            Some(e) => e,
            None => return Err(StudyError::SessionComplete),
        };
        if expected != item_id {
            if cursor > 0 && st.session.items[cursor - 1] == item_id {
                return Err(StudyError::Duplicate(item_id.to_string()));
            }
            return Err(StudyError::OutOfOrder { expected: expected.clone(), got: item_id.to_string() });
        }
        let key: Key = key.parse()?;
        if !(rt_ms.is_finite() && rt_ms > RT_BOUNDS_MS.0 && rt_ms < RT_BOUNDS_MS.1) {
            return Err(StudyError::InvalidRt(rt_ms));
        }
        let item = &self.items[item_id];
        let response = st.session.key_mapping.decode(key);
        let rec = TrialRecord {
            session_id: id.to_string(),
            item_id: item_id.to_string(),
            order_index: cursor,
            key_mapping: st.session.key_mapping,
            key_pressed: key,
            response,
            rt_ms,
            correct: response == item.ground_truth,
            form_id: item.form_id.clone(),
            family: item.family,
            modality: item.modality,
            arg_form: item.arg_form,
            ground_truth: item.ground_truth,
        };
        self.append(&LogRecord::Trial(rec.clone()))?;
        self.sessions.get_mut(id).expect("checked above").cursor += 1;
        self.trials.push(rec.clone());
        Ok(rec)
    }

    /// Trials in submission order, optionally restricted to some sessions.
    pub fn export(&self, sessions: Option<&[String]>) -> Vec<TrialRecord> {
        self.trials
            .iter()
            .filter(|t| sessions.is_none_or(|s| s.contains(&t.session_id)))
            .cloned()
            .collect()
    }

    pub fn mapping_counts(&self) -> (usize, usize) {
        (self.mapping_counts[0], self.mapping_counts[1])
    }

    pub fn session(&self, id: &str) -> Option<&Session> {
        self.sessions.get(id).map(|s| &s.session)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate, GenerateConfig};
    use crate::lexicon;

    fn pool() -> Vec<QuestionItem> {
        generate(&GenerateConfig { families: vec![Family::Main24], n: 5, seed: 42, lexicon: lexicon::natural() })
            .unwrap()
    }

    fn answer_all(store: &mut Store, id: &str, key: &str) {
        while let Next::Trial(t) = store.next_trial(id).unwrap() {
            store.submit(id, &t.item_id, key, 800.0).unwrap();
        }
    }

    #[test]
    fn alternation_and_one_item_per_form() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(&dir.path().join("log.jsonl"), pool(), StudyConfig::default()).unwrap();
        let maps: Vec<KeyMapping> = (0..4).map(|_| s.create_session().unwrap().key_mapping).collect();
        assert_eq!(maps, [KeyMapping::FYes, KeyMapping::FNo, KeyMapping::FYes, KeyMapping::FNo]);
        let a = s.create_session().unwrap();
        let b = s.create_session().unwrap();
        assert_ne!(a.session_id, b.session_id);
        assert_ne!(a.items, b.items);
        let forms: std::collections::BTreeSet<&str> = a.items.iter().map(|i| s.items[i].form_id.as_str()).collect();
        assert_eq!(forms.len(), 24);
    }

    #[test]
    fn mapping_decoding() {
        assert_eq!(KeyMapping::FYes.decode(Key::F), Label::Yes);
        assert_eq!(KeyMapping::FNo.decode(Key::F), Label::No);
        assert_eq!(KeyMapping::FNo.decode(Key::J), Label::Yes);
        assert!(KeyMapping::FYes.instructions().ends_with("\"F\" for Yes, and \"J\" for No."));
        assert!(KeyMapping::FNo.instructions().ends_with("\"F\" for No, and \"J\" for Yes."));
    }

    #[test]
    fn submission_rules() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(&dir.path().join("log.jsonl"), pool(), StudyConfig::default()).unwrap();
        let id = s.create_session().unwrap().session_id;
        let Next::Trial(t0) = s.next_trial(&id).unwrap() else { panic!() };
        assert_eq!(s.next_trial(&id).unwrap(), Next::Trial(t0.clone()));
        assert_eq!(t0.statements.len(), 2);
        assert!(t0.question.starts_with("Based on these statements, can we infer that "));

        assert!(matches!(s.submit(&id, &t0.item_id, "K", 500.0), Err(StudyError::InvalidKey(_))));
        assert!(matches!(s.submit(&id, &t0.item_id, "F", 50.0), Err(StudyError::InvalidRt(_))));
        assert!(matches!(s.submit(&id, &t0.item_id, "F", 0.0), Err(StudyError::InvalidRt(_))));
        assert!(matches!(s.submit("nope", &t0.item_id, "F", 500.0), Err(StudyError::UnknownSession(_))));
        let rec = s.submit(&id, &t0.item_id, "F", 500.0).unwrap();
        assert_eq!(rec.response, Label::Yes);
        assert_eq!(rec.correct, s.items[&t0.item_id].ground_truth == Label::Yes);
        assert!(matches!(s.submit(&id, &t0.item_id, "F", 500.0), Err(StudyError::Duplicate(_))));
        assert_eq!(s.export(None).len(), 1);
        let Next::Trial(t1) = s.next_trial(&id).unwrap() else { panic!() };
        assert!(matches!(s.submit(&id, "natural:bogus:0000", "J", 500.0), Err(StudyError::OutOfOrder { .. })));
        assert_eq!(t1.index, 1);
    }

    #[test]
    fn replay_restores_state() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("log.jsonl");
        let (id, exported) = {
            let mut s = Store::open(&log, pool(), StudyConfig::default()).unwrap();
            let a = s.create_session().unwrap().session_id;
            answer_all(&mut s, &a, "J");
            let b = s.create_session().unwrap().session_id;
            let Next::Trial(t) = s.next_trial(&b).unwrap() else { panic!() };
            s.submit(&b, &t.item_id, "F", 1200.0).unwrap();
            (b, s.export(None))
        };
        let s = Store::open(&log, pool(), StudyConfig::default()).unwrap();
        assert_eq!(s.export(None), exported);
        assert_eq!(exported.len(), 25);
        assert_eq!(s.mapping_counts(), (1, 1));
        let Next::Trial(t) = s.next_trial(&id).unwrap() else { panic!() };
        assert_eq!(t.index, 1);
        assert_eq!(s.export(Some(std::slice::from_ref(&id))).len(), 1);
    }

    #[test]
    fn completed_session_reports_done() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(&dir.path().join("log.jsonl"), pool(), StudyConfig::default()).unwrap();
        let id = s.create_session().unwrap().session_id;
        answer_all(&mut s, &id, "F");
        assert_eq!(s.next_trial(&id).unwrap(), Next::Done { total: 24 });
        let recs = s.export(None);
        assert_eq!(recs.iter().map(|r| r.order_index).collect::<Vec<_>>(), (0..24).collect::<Vec<_>>());
        assert!(recs.iter().all(|r| r.key_mapping.decode(r.key_pressed) == r.response));
        assert!(matches!(s.submit(&id, &recs[0].item_id, "F", 500.0), Err(StudyError::SessionComplete)));
    }
}
