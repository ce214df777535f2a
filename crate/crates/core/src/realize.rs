//! English realization of catalog forms as yes/no questions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::catalog::{ArgForm, CatalogEntry, Family, Label};
use crate::formula::{Formula, Modality};
use crate::lexicon::{Clause, Interpretation, LexiconKind};

pub const PROMPT_HEADER: &str = "Consider the following statements:";
pub const QUESTION_PREFIX: &str = "Question: Based on these statements, can we infer that ";
pub const ANSWER_CUE: &str = "Answer:";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RealizeError {
    #[error("atom `{0}` has no interpretation")]
    UninterpretedAtom(String),
}

/// One atomic statement under a modality, possibly negated.
///
/// | modality | positive                         | negated                              |
/// |----------|----------------------------------|--------------------------------------|
/// | none     | `{S} is {vp}`                    | `{S} isn't {vp}`                     |
/// | `□`      | `it's certain that {S} is {vp}`  | `it's uncertain whether {S} is {vp}` |
/// | `◇`      | `it's possible that {S} is {vp}` | `it's impossible that {S} is {vp}`   |
pub fn realize_statement(m: Modality, negated: bool, subject: &str, vp: &str) -> String {
    match (m, negated) {
        (Modality::None, false) => format!("{subject} is {vp}"),
        (Modality::None, true) => format!("{subject} isn't {vp}"),
        (Modality::Necessity, false) => format!("it's certain that {subject} is {vp}"),
        (Modality::Necessity, true) => format!("it's uncertain whether {subject} is {vp}"),
        (Modality::Possibility, false) => format!("it's possible that {subject} is {vp}"),
        (Modality::Possibility, true) => format!("it's impossible that {subject} is {vp}"),
    }
}

/// Lowercase clause for an arbitrary formula over `p` and `q`.
///
/// Modal operators applied to a compound formula prefix the whole clause
/// ("it's certain that A or B"); negations that are not covered by a
/// statement template fall back to "it's not the case that".
pub fn realize_clause(f: &Formula, interp: &Interpretation) -> Result<String, RealizeError> {
    let clause = |a: &str| -> Result<&Clause, RealizeError> {
        interp.clause_for(a).ok_or_else(|| RealizeError::UninterpretedAtom(a.into()))
    };
    let stmt = |m, neg, a: &str| -> Result<String, RealizeError> {
        let c = clause(a)?;
        Ok(realize_statement(m, neg, &c.subject, &c.verb_phrase))
    };
    Ok(match f {
        Formula::Atom(a) => stmt(Modality::None, false, a)?,
        Formula::Not(inner) => match &**inner {
            Formula::Atom(a) => stmt(Modality::None, true, a)?,
            Formula::Box(g) => match &**g {
                Formula::Atom(a) => stmt(Modality::Necessity, true, a)?,
                g => format!("it's uncertain whether {}", realize_clause(g, interp)?),
            },
            Formula::Diamond(g) => match &**g {
                Formula::Atom(a) => stmt(Modality::Possibility, true, a)?,
                g => format!("it's impossible that {}", realize_clause(g, interp)?),
            },
            g => format!("it's not the case that {}", realize_clause(g, interp)?),
        },
        Formula::Box(g) => format!("it's certain that {}", realize_clause(g, interp)?),
        Formula::Diamond(g) => format!("it's possible that {}", realize_clause(g, interp)?),
        Formula::Or(a, b) => {
            format!("{} or {}", realize_clause(a, interp)?, realize_clause(b, interp)?)
        }
        Formula::And(a, b) => {
            format!("{} and {}", realize_clause(a, interp)?, realize_clause(b, interp)?)
        }
        Formula::Implies(a, b) => {
            format!("if {}, then {}", realize_clause(a, interp)?, realize_clause(b, interp)?)
        }
    })
}

/// Capitalize the first character and terminate with a period.
pub fn sentence(clause: &str) -> String {
    let mut chars = clause.chars();
    let mut out = String::with_capacity(clause.len() + 1);
    if let Some(c) = chars.next() {
        out.extend(c.to_uppercase());
    }
    out.push_str(chars.as_str());
    out.push('.');
    out
}

/// Assemble the zero-shot prompt from statement sentences and the conclusion clause.
pub fn assemble_prompt(statements: &[String], conclusion_clause: &str) -> String {
    let mut out = String::from(PROMPT_HEADER);
    for s in statements {
        out.push('\n');
        out.push_str(s);
    }
    out.push('\n');
    out.push_str(QUESTION_PREFIX);
    out.push_str(conclusion_clause);
    out.push_str("?\n");
    out.push_str(ANSWER_CUE);
    out
}

/// Statement lines and the question line of a prompt built by [`assemble_prompt`].
pub fn prompt_parts(prompt: &str) -> Option<(Vec<&str>, &str)> {
    let mut lines = prompt.lines();
    if lines.next()? != PROMPT_HEADER {
        return None;
    }
    let mut statements = Vec::new();
    for line in lines {
        if let Some(q) = line.strip_prefix("Question: ") {
            return Some((statements, q));
        }
        statements.push(line);
    }
    None
}

/// One natural-language question. Field names match the dataset JSONL keys.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionItem {
    pub item_id: String,
    pub form_id: String,
    pub modality: Modality,
    pub arg_form: ArgForm,
    pub family: Family,
    pub ground_truth: Label,
    pub prompt: String,
    pub lexicon_kind: LexiconKind,
    pub subjects: [String; 2],
    pub verb_phrases: [String; 2],
}

impl QuestionItem {
    pub fn interpretation(&self) -> Interpretation {
        Interpretation::new(
            Clause::new(&self.subjects[0], &self.verb_phrases[0]),
            Clause::new(&self.subjects[1], &self.verb_phrases[1]),
        )
    }
}

/// Stable item identifier: `{lexicon}:{form}:{index}`.
pub fn item_id(kind: LexiconKind, form_id: &str, index: usize) -> String {
    format!("{}:{}:{:04}", kind.tag(), form_id, index)
}

/// Realize one catalog entry under one interpretation.
pub fn realize_question(
    entry: &CatalogEntry,
    interp: &Interpretation,
    kind: LexiconKind,
    index: usize,
) -> Result<QuestionItem, RealizeError> {
    let s = entry.sequent();
    let statements = s
        .premises
        .iter()
        .map(|p| realize_clause(p, interp).map(|c| sentence(&c)))
        .collect::<Result<Vec<_>, _>>()?;
    let conclusion = realize_clause(&s.conclusion, interp)?;
    Ok(QuestionItem {
        item_id: item_id(kind, &entry.id, index),
        form_id: entry.id.clone(),
        modality: entry.modality,
        arg_form: entry.arg_form,
        family: entry.family,
        ground_truth: entry.label,
        prompt: assemble_prompt(&statements, &conclusion),
        lexicon_kind: kind,
        subjects: [interp.first.subject.clone(), interp.second.subject.clone()],
        verb_phrases: [interp.first.verb_phrase.clone(), interp.second.verb_phrase.clone()],
    })
}

/// Every entry crossed with every interpretation, entry-major.
pub fn realize_dataset(
    entries: &[CatalogEntry],
    interps: &[Interpretation],
    kind: LexiconKind,
) -> Result<Vec<QuestionItem>, RealizeError> {
    let mut out = Vec::with_capacity(entries.len() * interps.len());
    for entry in entries {
        for (i, interp) in interps.iter().enumerate() {
            out.push(realize_question(entry, interp, kind, i)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin_catalog, find};

    fn jane_john() -> Interpretation {
        Interpretation::new(
            Clause::new("Jane", "watching a show"),
            Clause::new("John", "reading a book"),
        )
    }

    #[test]
    fn statement_templates() {
        assert_eq!(
            realize_statement(Modality::None, true, "Jane", "watching a show"),
            "Jane isn't watching a show"
        );
        assert_eq!(
            realize_statement(Modality::Necessity, true, "Jane", "watching a show"),
            "it's uncertain whether Jane is watching a show"
        );
        assert_eq!(
            realize_statement(Modality::Possibility, false, "John", "reading a book"),
            "it's possible that John is reading a book"
        );
    }

    #[test]
    fn plain_disjunctive_syllogism_prompt() {
        let cat = builtin_catalog();
        let q = realize_question(find(&cat, "main-none-disj_l-valid").unwrap(), &jane_john(), LexiconKind::Natural, 0)
            .unwrap();
        assert_eq!(
            q.prompt,
            "Consider the following statements:\n\
             Jane is watching a show or John is reading a book.\n\
             Jane isn't watching a show.\n\
             Question: Based on these statements, can we infer that John is reading a book?\n\
             Answer:"
        );
        assert_eq!(q.ground_truth, Label::Yes);
        assert_eq!(q.item_id, "natural:main-none-disj_l-valid:0000");
    }

    #[test]
    fn box_modus_ponens_premise() {
        let cat = builtin_catalog();
        let q = realize_question(
            find(&cat, "main-box-modus_ponens_l-valid").unwrap(),
            &jane_john(),
            LexiconKind::Natural,
            0,
        )
        .unwrap();
        let (statements, _) = prompt_parts(&q.prompt).unwrap();
        assert_eq!(
            statements[0],
            "If it's uncertain whether Jane is watching a show, then it's certain that John is reading a book."
        );
    }

    #[test]
    fn diamond_disj_r_fallacy_question() {
        let cat = builtin_catalog();
        let q = realize_question(
            find(&cat, "main-dia-disj_r-fallacy").unwrap(),
            &jane_john(),
            LexiconKind::Natural,
            0,
        )
        .unwrap();
        let (_, question) = prompt_parts(&q.prompt).unwrap();
        assert_eq!(
            question,
            "Based on these statements, can we infer that it's impossible that John is reading a book?"
        );
        assert_eq!(q.ground_truth, Label::No);
    }

    #[test]
    fn necessitation_has_one_statement() {
        let cat = builtin_catalog();
        let q = realize_question(find(&cat, "nec-box").unwrap(), &jane_john(), LexiconKind::Natural, 3).unwrap();
        let (statements, question) = prompt_parts(&q.prompt).unwrap();
        assert_eq!(statements, ["Jane is watching a show."]);
        assert_eq!(
            question,
            "Based on these statements, can we infer that it's certain that Jane is watching a show?"
        );
    }

    #[test]
    fn distribution_theorem_wording() {
        let cat = builtin_catalog();
        let q = realize_question(find(&cat, "dist-box-theorem").unwrap(), &jane_john(), LexiconKind::Natural, 0)
            .unwrap();
        let (statements, _) = prompt_parts(&q.prompt).unwrap();
        assert_eq!(
            statements,
            [
                "It's certain that Jane is watching a show or John is reading a book.",
                "It's certain that Jane isn't watching a show."
            ]
        );
    }

    #[test]
    fn uninterpreted_atom() {
        let f = Formula::parse("p | r").unwrap();
        assert_eq!(
            realize_clause(&f, &jane_john()),
            Err(RealizeError::UninterpretedAtom("r".into()))
        );
    }
}
