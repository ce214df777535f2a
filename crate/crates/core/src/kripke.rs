//! Kripke models, sequents and verdicts.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::Formula;
use crate::syntax::SyntaxError;

/// Frame class constraining the accessibility relation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameClass {
    /// No constraint (system K).
    K,
    /// Every world sees itself (system T).
    #[default]
    Reflexive,
}

impl FrameClass {
    pub fn tag(self) -> &'static str {
        match self {
            FrameClass::K => "k",
            FrameClass::Reflexive => "t",
        }
    }
}

impl core::str::FromStr for FrameClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "k" => Ok(FrameClass::K),
            "t" | "reflexive" => Ok(FrameClass::Reflexive),
            other => Err(alloc::format!("unknown frame class `{other}` (expected k or t)")),
        }
    }
}

/// Consequence relation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// The conclusion holds at every world where all premises hold.
    #[default]
    Local,
    /// The conclusion holds everywhere in every model whose worlds all satisfy the premises.
    Global,
}

impl Mode {
    pub fn tag(self) -> &'static str {
        match self {
            Mode::Local => "local",
            Mode::Global => "global",
        }
    }
}

impl core::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "local" => Ok(Mode::Local),
            "global" => Ok(Mode::Global),
            other => Err(alloc::format!("unknown mode `{other}` (expected local or global)")),
        }
    }
}

/// A finite Kripke model with a designated world.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KripkeModel {
    pub worlds: usize,
    pub accessibility: BTreeSet<(usize, usize)>,
    /// Atoms true at each world; atoms not listed are false.
    pub valuation: Vec<BTreeSet<String>>,
    pub designated: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("model has no worlds")]
    Empty,
    #[error("designated world {0} is out of range")]
    DesignatedOutOfRange(usize),
    #[error("edge ({0}, {1}) leaves the world set")]
    EdgeOutOfRange(usize, usize),
    #[error("valuation covers {0} worlds, expected {1}")]
    ValuationLength(usize, usize),
    #[error("world {0} is not reflexive")]
    NotReflexive(usize),
}

impl KripkeModel {
    /// A model with `worlds` worlds, no edges and every atom false.
    pub fn empty(worlds: usize) -> KripkeModel {
        KripkeModel {
            worlds,
            accessibility: BTreeSet::new(),
            valuation: alloc::vec![BTreeSet::new(); worlds],
            designated: 0,
        }
    }

    pub fn with_edge(mut self, from: usize, to: usize) -> Self {
        self.accessibility.insert((from, to));
        self
    }

    pub fn with_true(mut self, world: usize, atom: &str) -> Self {
        self.valuation[world].insert(String::from(atom));
        self
    }

    /// Add `(w, w)` for every world.
    pub fn make_reflexive(&mut self) {
        for w in 0..self.worlds {
            self.accessibility.insert((w, w));
        }
    }

    /// Check structural invariants, including reflexivity for `frames`.
    pub fn validate(&self, frames: FrameClass) -> Result<(), ModelError> {
        if self.worlds == 0 {
            return Err(ModelError::Empty);
        }
        if self.designated >= self.worlds {
            return Err(ModelError::DesignatedOutOfRange(self.designated));
        }
        if self.valuation.len() != self.worlds {
            return Err(ModelError::ValuationLength(self.valuation.len(), self.worlds));
        }
        if let Some(&(a, b)) = self
            .accessibility
            .iter()
            .find(|(a, b)| *a >= self.worlds || *b >= self.worlds)
        {
            return Err(ModelError::EdgeOutOfRange(a, b));
        }
        if frames == FrameClass::Reflexive {
            if let Some(w) = (0..self.worlds).find(|w| !self.accessibility.contains(&(*w, *w))) {
                return Err(ModelError::NotReflexive(w));
            }
        }
        Ok(())
    }

    pub fn successors(&self, w: usize) -> impl Iterator<Item = usize> + '_ {
        self.accessibility
            .range((w, 0)..=(w, usize::MAX))
            .map(|&(_, v)| v)
    }

    pub fn is_true(&self, w: usize, atom: &str) -> bool {
        self.valuation.get(w).is_some_and(|s| s.contains(atom))
    }

    /// Kripke satisfaction of `f` at world `w`.
    pub fn eval_at_world(&self, w: usize, f: &Formula) -> bool {
        match f {
            Formula::Atom(a) => self.is_true(w, a),
            Formula::Not(a) => !self.eval_at_world(w, a),
            Formula::Box(a) => self.successors(w).all(|v| self.eval_at_world(v, a)),
            Formula::Diamond(a) => self.successors(w).any(|v| self.eval_at_world(v, a)),
            Formula::Or(a, b) => self.eval_at_world(w, a) || self.eval_at_world(w, b),
            Formula::And(a, b) => self.eval_at_world(w, a) && self.eval_at_world(w, b),
            Formula::Implies(a, b) => !self.eval_at_world(w, a) || self.eval_at_world(w, b),
        }
    }

    /// True if the model refutes `s` at its designated world: premises hold
    /// (at the designated world for local mode, everywhere for global mode)
    /// and the conclusion fails at the designated world.
    pub fn refutes(&self, s: &Sequent) -> bool {
        if self.validate(s.frames).is_err() {
            return false;
        }
        let premises_hold = match s.mode {
            Mode::Local => s.premises.iter().all(|p| self.eval_at_world(self.designated, p)),
            Mode::Global => (0..self.worlds)
                .all(|w| s.premises.iter().all(|p| self.eval_at_world(w, p))),
        };
        premises_hold && !self.eval_at_world(self.designated, &s.conclusion)
    }
}

impl fmt::Display for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "worlds:")?;
        for w in 0..self.worlds {
            write!(f, " w{w}")?;
        }
        writeln!(f)?;
        writeln!(f, "designated: w{}", self.designated)?;
        write!(f, "edges:")?;
        if self.accessibility.is_empty() {
            write!(f, " (none)")?;
        }
        for (a, b) in &self.accessibility {
            write!(f, " w{a}->w{b}")?;
        }
        writeln!(f)?;
        writeln!(f, "valuation:")?;
        for (w, atoms) in self.valuation.iter().enumerate() {
            write!(f, "  w{w}:")?;
            if atoms.is_empty() {
                write!(f, " (none)")?;
            }
            for a in atoms {
                write!(f, " {a}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Premises, conclusion, consequence mode and frame class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sequent {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    pub mode: Mode,
    pub frames: FrameClass,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SequentParseError {
    #[error("missing `|-` between premises and conclusion")]
    MissingTurnstile,
    #[error("premise {index}: {source}")]
    Premise { index: usize, source: SyntaxError },
    #[error("conclusion: {0}")]
    Conclusion(SyntaxError),
}

impl Sequent {
    pub fn new(premises: Vec<Formula>, conclusion: Formula) -> Sequent {
        Sequent { premises, conclusion, mode: Mode::Local, frames: FrameClass::Reflexive }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_frames(mut self, frames: FrameClass) -> Self {
        self.frames = frames;
        self
    }

    /// Parse `premise; premise |- conclusion` (mode and frames default to local/T).
    pub fn parse(text: &str) -> Result<Sequent, SequentParseError> {
        let (lhs, rhs) = text
            .split_once("|-")
            .or_else(|| text.split_once('⊢'))
            .ok_or(SequentParseError::MissingTurnstile)?;
        let premises = lhs
            .split(';')
            .filter(|p| !p.trim().is_empty())
            .enumerate()
            .map(|(index, p)| {
                Formula::parse(p).map_err(|source| SequentParseError::Premise { index: index + 1, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let conclusion = Formula::parse(rhs).map_err(SequentParseError::Conclusion)?;
        Ok(Sequent::new(premises, conclusion))
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for p in &self.premises {
            p.collect_atoms(&mut out);
        }
        self.conclusion.collect_atoms(&mut out);
        out
    }

    pub fn modal_depth(&self) -> usize {
        self.premises
            .iter()
            .chain(core::iter::once(&self.conclusion))
            .map(Formula::modal_depth)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.premises.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{p}")?;
        }
        if !self.premises.is_empty() {
            write!(f, " ")?;
        }
        write!(f, "|- {}", self.conclusion)
    }
}

/// Outcome of deciding a sequent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub valid: bool,
    /// Present exactly when `valid` is false.
    pub countermodel: Option<KripkeModel>,
}

impl Verdict {
    pub fn valid() -> Verdict {
        Verdict { valid: true, countermodel: None }
    }

    pub fn invalid(model: KripkeModel) -> Verdict {
        Verdict { valid: false, countermodel: Some(model) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn vacuous_box_and_empty_diamond() {
        let m = KripkeModel::empty(1).with_true(0, "p");
        assert!(m.eval_at_world(0, &f("[]p")));
        assert!(!m.eval_at_world(0, &f("<>p")));
    }

    #[test]
    fn two_world_model() {
        // w -> v, p true only at v
        let m = KripkeModel::empty(2).with_edge(0, 1).with_true(1, "p");
        assert!(m.eval_at_world(0, &f("[]p")));
        assert!(m.eval_at_world(0, &f("<>p")));
        assert!(!m.eval_at_world(0, &f("p")));
        assert!(!m.eval_at_world(1, &f("<>p")));
    }

    #[test]
    fn missing_atoms_are_false() {
        let m = KripkeModel::empty(1);
        assert!(!m.eval_at_world(0, &f("zzz")));
        assert!(m.eval_at_world(0, &f("~zzz")));
    }

    #[test]
    fn validate_checks_reflexivity() {
        let mut m = KripkeModel::empty(2).with_edge(0, 1);
        assert_eq!(m.validate(FrameClass::K), Ok(()));
        assert_eq!(m.validate(FrameClass::Reflexive), Err(ModelError::NotReflexive(0)));
        m.make_reflexive();
        assert_eq!(m.validate(FrameClass::Reflexive), Ok(()));
        m.designated = 5;
        assert_eq!(m.validate(FrameClass::K), Err(ModelError::DesignatedOutOfRange(5)));
    }

    #[test]
    fn sequent_parsing() {
        let s = Sequent::parse("p|q; ~p |- q").unwrap();
        assert_eq!(s.premises, alloc::vec![f("p | q"), f("~p")]);
        assert_eq!(s.conclusion, f("q"));
        assert_eq!(alloc::format!("{s}"), "p | q; ~p |- q");

        let s = Sequent::parse("|- p | ~p").unwrap();
        assert!(s.premises.is_empty());

        assert_eq!(Sequent::parse("p, q"), Err(SequentParseError::MissingTurnstile));
        assert!(matches!(
            Sequent::parse("p; (q |- r"),
            Err(SequentParseError::Premise { index: 2, .. })
        ));
    }
}
