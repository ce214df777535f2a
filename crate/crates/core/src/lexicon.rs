//! Subject names, progressive verb phrases and interpretation sampling.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconKind {
    #[default]
    Natural,
    /// Pseudo-word verb phrases that keep the logical form but raise perplexity.
    Nonsense,
}

impl LexiconKind {
    pub fn tag(self) -> &'static str {
        match self {
            LexiconKind::Natural => "natural",
            LexiconKind::Nonsense => "nonsense",
        }
    }
}

impl fmt::Display for LexiconKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl core::str::FromStr for LexiconKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "natural" => Ok(LexiconKind::Natural),
            "nonsense" => Ok(LexiconKind::Nonsense),
            other => Err(alloc::format!("unknown lexicon `{other}` (expected natural or nonsense)")),
        }
    }
}

/// Names plus verb phrases already in progressive form ("making a pizza").
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub names: Vec<String>,
    pub verb_phrases: Vec<String>,
    pub kind: LexiconKind,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon has an empty {0} list")]
    Empty(&'static str),
    #[error("duplicate {0} entry `{1}`")]
    Duplicate(&'static str, String),
    #[error("lexicon needs at least 2 names and 2 verb phrases (has {names} and {verb_phrases})")]
    TooSmall { names: usize, verb_phrases: usize },
    #[error("interpretation count must be positive")]
    ZeroCount,
}

impl Lexicon {
    pub fn validate(&self) -> Result<(), LexiconError> {
        for (what, list) in [("names", &self.names), ("verb_phrases", &self.verb_phrases)] {
            if list.is_empty() {
                return Err(LexiconError::Empty(what));
            }
            let mut seen = BTreeSet::new();
            for item in list {
                if !seen.insert(item.as_str()) {
                    return Err(LexiconError::Duplicate(what, item.clone()));
                }
            }
        }
        Ok(())
    }

    /// Lowercase words used by the verb phrases.
    pub fn words(&self) -> BTreeSet<String> {
        self.verb_phrases
            .iter()
            .flat_map(|vp| vp.split_whitespace())
            .map(|w| w.to_lowercase())
            .collect()
    }
}

/// A subject paired with a progressive verb phrase: "Jane" / "watching a show".
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub subject: String,
    pub verb_phrase: String,
}

impl Clause {
    pub fn new(subject: &str, verb_phrase: &str) -> Clause {
        Clause { subject: String::from(subject), verb_phrase: String::from(verb_phrase) }
    }
}

/// Meanings for the two propositional variables `p` and `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interpretation {
    pub first: Clause,
    pub second: Clause,
}

impl Interpretation {
    pub fn new(first: Clause, second: Clause) -> Interpretation {
        Interpretation { first, second }
    }

    /// Distinct subjects and distinct verb phrases.
    pub fn is_independent(&self) -> bool {
        self.first.subject != self.second.subject && self.first.verb_phrase != self.second.verb_phrase
    }

    /// Clause for an atom: `p` is the first pair, `q` the second.
    pub fn clause_for(&self, atom: &str) -> Option<&Clause> {
        match atom {
            "p" => Some(&self.first),
            "q" => Some(&self.second),
            _ => None,
        }
    }
}

fn distinct_pair<R: Rng>(rng: &mut R, len: usize) -> (usize, usize) {
    let i = rng.gen_range(0..len);
    let mut j = rng.gen_range(0..len - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Draw `n` interpretations; each uses two distinct names and two distinct
/// verb phrases. Interpretations are sampled independently of each other.
pub fn sample_interpretations(
    lex: &Lexicon,
    n: usize,
    seed: u64,
) -> Result<Vec<Interpretation>, LexiconError> {
    if n == 0 {
        return Err(LexiconError::ZeroCount);
    }
    if lex.names.len() < 2 || lex.verb_phrases.len() < 2 {
        return Err(LexiconError::TooSmall {
            names: lex.names.len(),
            verb_phrases: lex.verb_phrases.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let (a, b) = distinct_pair(&mut rng, lex.names.len());
            let (c, d) = distinct_pair(&mut rng, lex.verb_phrases.len());
            Interpretation::new(
                Clause::new(&lex.names[a], &lex.verb_phrases[c]),
                Clause::new(&lex.names[b], &lex.verb_phrases[d]),
            )
        })
        .collect())
}

const ONSETS: [&str; 24] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "pr", "sw", "st",
    "tr", "gl", "pl", "bl", "cr", "fl",
];
const VOWELS: [&str; 8] = ["a", "e", "i", "o", "u", "ee", "oo", "ai"];
const CODAS: [&str; 8] = ["l", "r", "n", "m", "t", "nd", "st", "rt"];
const ENDINGS: [&str; 6] = ["y", "ery", "ate", "et", "on", "ine"];

fn pick<'a, R: Rng>(rng: &mut R, from: &[&'a str]) -> &'a str {
    from[rng.gen_range(0..from.len())]
}

/// A pseudo-verb in progressive form: "balaring", "sweeling".
fn pseudo_verb<R: Rng>(rng: &mut R) -> String {
    let mut w = String::new();
    if rng.gen_bool(0.5) {
        w.push_str(pick(rng, &ONSETS));
        w.push_str(pick(rng, &VOWELS[..5]));
    }
    w.push_str(pick(rng, &ONSETS));
    w.push_str(pick(rng, &VOWELS));
    w.push_str(pick(rng, &CODAS[..5]));
    w.push_str("ing");
    w
}

/// A pseudo-noun: "montery", "prandate".
fn pseudo_noun<R: Rng>(rng: &mut R) -> String {
    let mut w = String::new();
    w.push_str(pick(rng, &ONSETS));
    w.push_str(pick(rng, &VOWELS[..5]));
    w.push_str(pick(rng, &CODAS));
    w.push_str(pick(rng, &ONSETS[..14]));
    w.push_str(pick(rng, &ENDINGS));
    w
}

fn starts_with_vowel(w: &str) -> bool {
    matches!(w.as_bytes().first(), Some(b'a' | b'e' | b'i' | b'o' | b'u'))
}

/// Build a mirror lexicon of pronounceable pseudo-word verb phrases over real
/// first names. No generated word appears in `exclude_words`.
pub fn make_nonsense_lexicon(
    names: &[String],
    exclude_words: &BTreeSet<String>,
    verb_phrase_count: usize,
    seed: u64,
) -> Lexicon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = BTreeSet::new();
    let mut fresh = |rng: &mut ChaCha8Rng, make: fn(&mut ChaCha8Rng) -> String| loop {
        let w = make(rng);
        if !exclude_words.contains(&w) && used.insert(w.clone()) {
            return w;
        }
    };
    let mut verb_phrases = Vec::with_capacity(verb_phrase_count);
    while verb_phrases.len() < verb_phrase_count {
        let verb = fresh(&mut rng, pseudo_verb);
        let noun = fresh(&mut rng, pseudo_noun);
        let vp = if rng.gen_bool(0.3) {
            alloc::format!("{verb} {noun}s")
        } else if starts_with_vowel(&noun) {
            alloc::format!("{verb} an {noun}")
        } else {
            alloc::format!("{verb} a {noun}")
        };
        verb_phrases.push(vp);
    }
    Lexicon { names: names.to_vec(), verb_phrases, kind: LexiconKind::Nonsense }
}
