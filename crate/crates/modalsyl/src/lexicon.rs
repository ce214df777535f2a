//! Bundled and user-supplied lexicons.

use std::path::Path;

use modalsyl_core::lexicon::make_nonsense_lexicon;
use modalsyl_core::{Lexicon, LexiconKind};
use serde::Deserialize;

use crate::Error;

const NATURAL: &str = include_str!("../data/lexicon_natural.json");

/// Seed of the bundled nonsense lexicon; fixed so the mirror dataset does not
/// change with the sampling seed.
pub const NONSENSE_SEED: u64 = 0x6d6f_6461_6c73_796c;

#[derive(Deserialize)]
struct LexiconFile {
    names: Vec<String>,
    verb_phrases: Vec<String>,
    #[serde(default)]
    kind: Option<LexiconKind>,
}

/// 200 first names and over 200 everyday progressive verb phrases.
pub fn natural() -> Lexicon {
    let f: LexiconFile = serde_json::from_str(NATURAL).expect("bundled lexicon is valid JSON");
    Lexicon { names: f.names, verb_phrases: f.verb_phrases, kind: LexiconKind::Natural }
}

/// Same names as [`natural`], with pseudo-word verb phrases that share no
/// word with the natural phrases.
pub fn nonsense() -> Lexicon {
    let nat = natural();
    make_nonsense_lexicon(&nat.names, &nat.words(), nat.verb_phrases.len(), NONSENSE_SEED)
}

pub fn builtin(kind: LexiconKind) -> Lexicon {
    match kind {
        LexiconKind::Natural => natural(),
        LexiconKind::Nonsense => nonsense(),
    }
}

/// Read `{"names": [...], "verb_phrases": [...], "kind"?: "natural"|"nonsense"}`.
pub fn load(path: &Path) -> Result<Lexicon, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let f: LexiconFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let lex = Lexicon {
        names: f.names,
        verb_phrases: f.verb_phrases,
        kind: f.kind.unwrap_or_default(),
    };
    lex.validate()?;
    Ok(lex)
}

/// `natural`, `nonsense`, or a path to a lexicon file.
pub fn resolve(spec: &str) -> Result<Lexicon, Error> {
    match spec.parse::<LexiconKind>() {
        Ok(kind) => Ok(builtin(kind)),
        Err(_) => load(Path::new(spec)),
    }
}
